#include "bscreg/common.hpp"

#include <omp.h>

#include <cmath>
#include <cstdlib>
#include <numbers>

namespace bscreg {

const char* error_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::BadInput: return "BAD_INPUT";
    case ErrorCode::BadParams: return "BAD_PARAMS";
    case ErrorCode::Infeasible: return "INFEASIBLE";
    case ErrorCode::FailsContainment: return "FAILS_CONTAINMENT";
    case ErrorCode::NotFound: return "NOT_FOUND";
    case ErrorCode::MuOutOfRange: return "MU_OUT_OF_RANGE";
    case ErrorCode::MeshFail: return "MESH_FAIL";
    case ErrorCode::MaxIters: return "MAX_ITERS";
    case ErrorCode::NoQ: return "NO_Q";
    case ErrorCode::NotIsotropic: return "NOT_ISOTROPIC";
  }
  return "UNKNOWN";
}

int thread_count() {
  const char* s = std::getenv("BSCREG_THREADS");
  if (!s) return 0;
  int n = std::atoi(s);
  return n > 0 ? n : 0;
}

void apply_thread_env() {
  int n = thread_count();
  if (n > 0) omp_set_num_threads(n);
}

const MollifierRule& MollifierRule::get() {
  static const MollifierRule rule = [] {
    MollifierRule r;
    const int nr = 16, nt = 16;
    const double dr = 1.0 / nr, dt = 2.0 * std::numbers::pi / nt;
    double total = 0.0;
    for (int i = 0; i < nr; ++i) {
      double rad = (i + 0.5) * dr;
      double w = std::exp(-1.0 / (1.0 - rad * rad)) * rad * dr * dt;
      for (int j = 0; j < nt; ++j) {
        double th = (j + 0.5) * dt;
        r.offsets.emplace_back(rad * std::cos(th), rad * std::sin(th));
        r.weights.push_back(w);
        total += w;
      }
    }
    for (double& w : r.weights) w /= total;
    return r;
  }();
  return rule;
}

double mollify(const ScalarFn& f, const Vec2& x, double eps) {
  const auto& rule = MollifierRule::get();
  double s = 0.0;
  for (size_t q = 0; q < rule.offsets.size(); ++q) s += rule.weights[q] * f(x - eps * rule.offsets[q]);
  return s;
}

Vec2 mollify_gradient(const std::function<Vec2(const Vec2&)>& g, const Vec2& x, double eps) {
  const auto& rule = MollifierRule::get();
  Vec2 s = Vec2::Zero();
  for (size_t q = 0; q < rule.offsets.size(); ++q) s += rule.weights[q] * g(x - eps * rule.offsets[q]);
  return s;
}

}  // namespace bscreg
