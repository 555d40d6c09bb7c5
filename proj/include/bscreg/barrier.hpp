#pragma once

#include "bscreg/boundary.hpp"
#include "bscreg/mesh.hpp"

#include <string>

namespace bscreg {

struct BarrierConstants {
  double K = 0.0, R = 0.0, mu = 1.0, diam = 0.0;
  double Lambda = 0.0, T = 0.0, L0 = 0.0;
  double lipschitz_bound() const { return L0 / mu; }
};

// Lambda = |f|_inf + 1, T = (18/mu)((R+K+3)/diam + Lambda + 1),
// L0 = 18[4((R+K+3)/diam + Lambda + 1)(diam + 1) + K + 2].
BarrierConstants constants(double K, double R, double mu, double f_sup, double diam);

// (2 diam + <nu, x - y>)^2 - 4 diam^2
double paraboloid(const Vec2& y, const Vec2& nu, double diam, const Vec2& x);
Vec2 paraboloid_gradient(const Vec2& y, const Vec2& nu, double diam, const Vec2& x);

class BarrierPair {
 public:
  // exterior gives the datum off the body; the sup/inf run over the datum's samples.
  BarrierPair(BoundaryDatum datum, ScalarFn exterior, const BarrierConstants& c);

  double lower(const Vec2& x) const;
  double upper(const Vec2& x) const;
  double psi_minus(size_t i, const Vec2& x) const;
  double psi_plus(size_t i, const Vec2& x) const;
  Vec2 psi_minus_gradient(size_t i, const Vec2& x) const;

  double lipschitz_bound() const { return c_.lipschitz_bound(); }
  const BarrierConstants& constants() const { return c_; }
  const BoundaryDatum& datum() const { return d_; }
  double exterior(const Vec2& x) const { return ext_(x); }

 private:
  BoundaryDatum d_;
  ScalarFn ext_;
  BarrierConstants c_;
  double diam_;
};

struct SandwichReport {
  double lower_margin = 0.0;  // min over nodes of u - lower
  double upper_margin = 0.0;  // min over nodes of upper - u
  double tolerance = 1e-6;
  long witness = -1;  // node of the worst margin when failing
  Vec2 witness_point = Vec2::Zero();
  bool pass() const { return lower_margin >= -tolerance && upper_margin >= -tolerance; }
};

SandwichReport sandwich_check(const BarrierPair& pair, const ScalarField& field, double tolerance = 1e-6);

void write_barrier_csv(const std::string& path, const BarrierPair& pair, const std::vector<Vec2>& points);

}  // namespace bscreg
