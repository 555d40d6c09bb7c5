#pragma once

#include <Eigen/Core>

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace bscreg {

using Vec2 = Eigen::Vector2d;
using ScalarFn = std::function<double(const Vec2&)>;

enum class ErrorCode {
  BadInput,
  BadParams,
  Infeasible,
  FailsContainment,
  NotFound,
  MuOutOfRange,
  MeshFail,
  MaxIters,
  NoQ,
  NotIsotropic,
};

const char* error_name(ErrorCode c);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode c, const std::string& what)
      : std::runtime_error(std::string(error_name(c)) + ": " + what), code_(c) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Thread count from BSCREG_THREADS; 0 or unset leaves the OpenMP default.
int thread_count();
void apply_thread_env();

inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

// Unit-mass radial bump exp(-1/(1-r^2)) on the disc of radius eps, discretised
// by a 16x16 polar midpoint rule. Shared by every mollification in the library.
struct MollifierRule {
  std::vector<Vec2> offsets;  // at eps = 1
  std::vector<double> weights;
  static const MollifierRule& get();
};

double mollify(const ScalarFn& f, const Vec2& x, double eps);
Vec2 mollify_gradient(const std::function<Vec2(const Vec2&)>& g, const Vec2& x, double eps);

}  // namespace bscreg
