#pragma once

#include "bscreg/geometry.hpp"

#include <memory>
#include <optional>

namespace bscreg {

struct BoundaryDatum {
  ConvexBody body;
  std::vector<Vec2> points;
  std::vector<double> values;
  std::vector<Vec2> normals;
  std::vector<Vec2> zeta_minus;
  std::vector<Vec2> zeta_plus;
  double K = 0.0;
};

struct BscWitness {
  size_t index;
  Vec2 point;
  bool upper;  // true if the upper slope was the infeasible one
};

struct BscResult {
  std::optional<BoundaryDatum> datum;
  std::optional<BscWitness> witness;
  bool ok() const { return datum.has_value(); }
};

struct BscOptions {
  double slack = 1e-11;  // absolute slack per support constraint
};

// Samples of a boundary function: at least n points plus every vertex, or the vertices
// alone when n <= 0 (data that are not affine on faces fail the condition on flat edges).
void sample_datum(const ConvexBody& body, const ScalarFn& phi, int n, std::vector<Vec2>& points,
                  std::vector<double>& values);

Vec2 outward_normal(const ConvexBody& body, const Vec2& y);

BscResult certify_bsc(const ConvexBody& body, const std::vector<Vec2>& points, const std::vector<double>& values,
                      double K, const BscOptions& opts = {});
// Throws INFEASIBLE with the witness in the message.
BoundaryDatum certify_bsc_or_throw(const ConvexBody& body, const std::vector<Vec2>& points,
                                   const std::vector<double>& values, double K, const BscOptions& opts = {});

// Largest violation of the two-sided support inequality over all sample pairs.
double bsc_violation(const BoundaryDatum& d);

// Smallest certifiable rank by bisection over certify_bsc.
double minimal_rank(const ConvexBody& body, const std::vector<Vec2>& points, const std::vector<double>& values,
                    double hi, double tol = 1e-6);

class DatumExtension {
 public:
  explicit DatumExtension(const BoundaryDatum& d);

  double phi_minus0(const Vec2& x) const;
  double phi_plus0(const Vec2& x) const;
  double phi_minus(const Vec2& x) const;
  double phi_plus(const Vec2& x) const;
  ScalarFn minus_fn() const;
  ScalarFn plus_fn() const;
  // Mollifications at radius eps, pruning affine pieces that cannot be active in the eps-ball.
  double mollified_minus(const Vec2& x, double eps) const;
  double mollified_gap(const Vec2& x, double eps) const;
  double lipschitz_rank() const { return K_ + 1.0; }
  double K() const { return K_; }
  const ConvexBody& body() const { return body_; }
  double d0() const { return d0_; }

 private:
  struct Affine {
    Vec2 slope;
    double offset;
  };
  std::vector<Affine> lower_, upper_;
  std::vector<Affine> active(const std::vector<Affine>& pieces, const Vec2& x, double eps, bool upper) const;
  ConvexBody body_;
  double d0_;
  double K_;
};

// max dist(x, body) over exterior points with phi_minus(x) <= phi_plus(x) + s, found by
// bisection along rays from the center (the set is star-shaped about it by convexity).
DomainApproximation approximate_domain(const DatumExtension& ext, int k, double mollification_radius,
                                       const DomainApproxOptions& opts = {});

double containment_margin(const DatumExtension& ext, double s, int rays = 1440);

}  // namespace bscreg
