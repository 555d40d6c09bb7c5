#include "bscreg/barrier.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>

namespace bscreg {

BarrierConstants constants(double K, double R, double mu, double f_sup, double diam) {
  if (!(mu > 0.0 && mu <= 1.0)) throw Error(ErrorCode::MuOutOfRange, "mu must lie in (0, 1]");
  if (!(diam > 0.0)) throw Error(ErrorCode::BadInput, "diameter must be positive");
  BarrierConstants c;
  c.K = K;
  c.R = R;
  c.mu = mu;
  c.diam = diam;
  c.Lambda = std::abs(f_sup) + 1.0;
  const double A = (R + K + 3.0) / diam + c.Lambda + 1.0;
  c.T = 18.0 / mu * A;
  c.L0 = 18.0 * (4.0 * A * (diam + 1.0) + K + 2.0);
  return c;
}

double paraboloid(const Vec2& y, const Vec2& nu, double diam, const Vec2& x) {
  const double s = 2.0 * diam + nu.dot(x - y);
  return s * s - 4.0 * diam * diam;
}

Vec2 paraboloid_gradient(const Vec2& y, const Vec2& nu, double diam, const Vec2& x) {
  return 2.0 * (2.0 * diam + nu.dot(x - y)) * nu;
}

BarrierPair::BarrierPair(BoundaryDatum datum, ScalarFn exterior, const BarrierConstants& c)
    : d_(std::move(datum)), ext_(std::move(exterior)), c_(c), diam_(diameter(d_.body)) {}

double BarrierPair::psi_minus(size_t i, const Vec2& x) const {
  return d_.values[i] + d_.zeta_minus[i].dot(x - d_.points[i]) + c_.T * paraboloid(d_.points[i], d_.normals[i], diam_, x);
}

double BarrierPair::psi_plus(size_t i, const Vec2& x) const {
  return d_.values[i] + d_.zeta_plus[i].dot(x - d_.points[i]) - c_.T * paraboloid(d_.points[i], d_.normals[i], diam_, x);
}

Vec2 BarrierPair::psi_minus_gradient(size_t i, const Vec2& x) const {
  return d_.zeta_minus[i] + c_.T * paraboloid_gradient(d_.points[i], d_.normals[i], diam_, x);
}

double BarrierPair::lower(const Vec2& x) const {
  if (!d_.body.contains(x, 1e-12)) return ext_(x);
  double v = -INFINITY;
  for (size_t i = 0; i < d_.points.size(); ++i) v = std::max(v, psi_minus(i, x));
  return v;
}

double BarrierPair::upper(const Vec2& x) const {
  if (!d_.body.contains(x, 1e-12)) return ext_(x);
  double v = INFINITY;
  for (size_t i = 0; i < d_.points.size(); ++i) v = std::min(v, psi_plus(i, x));
  return v;
}

SandwichReport sandwich_check(const BarrierPair& pair, const ScalarField& field, double tolerance) {
  const Mesh& M = *field.mesh;
  const long n = long(M.nodes.size());
  std::vector<double> lo(n), up(n);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    lo[i] = field.values[i] - pair.lower(M.nodes[i]);
    up[i] = pair.upper(M.nodes[i]) - field.values[i];
  }
  SandwichReport r;
  r.tolerance = tolerance;
  r.lower_margin = r.upper_margin = INFINITY;
  double worst = INFINITY;
  for (long i = 0; i < n; ++i) {
    r.lower_margin = std::min(r.lower_margin, lo[i]);
    r.upper_margin = std::min(r.upper_margin, up[i]);
    double w = std::min(lo[i], up[i]);
    if (w < worst) {
      worst = w;
      r.witness = i;
      r.witness_point = M.nodes[i];
    }
  }
  if (r.pass()) {
    r.witness = -1;
    r.witness_point = Vec2::Zero();
  }
  return r;
}

void write_barrier_csv(const std::string& path, const BarrierPair& pair, const std::vector<Vec2>& points) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::BadInput, "cannot write " + path);
  os << "x,y,lower,upper\n" << std::setprecision(17);
  for (const auto& p : points) os << p.x() << ',' << p.y() << ',' << pair.lower(p) << ',' << pair.upper(p) << '\n';
}

}  // namespace bscreg
