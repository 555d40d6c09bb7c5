#pragma once

#include "bscreg/common.hpp"

#include <optional>
#include <vector>

namespace bscreg {

class ConvexBody {
 public:
  // Counter-clockwise vertices. Vertices closer than 1e-12 are merged and
  // collinear middle vertices dropped; center defaults to the vertex centroid.
  ConvexBody(std::vector<Vec2> vertices, std::optional<Vec2> center = std::nullopt);

  const std::vector<Vec2>& vertices() const { return v_; }
  const Vec2& center() const { return c_; }
  size_t size() const { return v_.size(); }
  const Vec2& vertex(size_t i) const { return v_[i % v_.size()]; }
  // Outward unit normal and support offset <n_e, v_e - center> of edge v_e -> v_{e+1}.
  const Vec2& edge_normal(size_t e) const { return n_[e]; }
  double edge_offset(size_t e) const { return h_[e]; }

  double gauge(const Vec2& x) const;
  bool contains(const Vec2& x, double tol = 0.0) const { return gauge(x) <= 1.0 + tol; }
  // Distance from x to the closed body (0 inside).
  double distance(const Vec2& x) const;
  double distance_to_boundary(const Vec2& x) const;
  // Boundary point on the ray from the center in direction dir.
  Vec2 ray_hit(const Vec2& dir) const;
  double area() const;
  double perimeter() const;

 private:
  std::vector<Vec2> v_;
  std::vector<Vec2> n_;
  std::vector<double> h_;
  std::vector<double> ang_;  // unwrapped polar angle of each vertex about c_
  Vec2 c_;
  size_t edge_for_direction(const Vec2& d) const;
};

struct BodyMetrics {
  double diameter;
  double inradius;    // dist(center, boundary)
  double max_radius;  // max |center - y| over the boundary
  double beta;        // max_radius / (2 inradius)
};

ConvexBody regular_polygon(int n, double radius, const Vec2& center = Vec2::Zero());
ConvexBody box(double x0, double y0, double x1, double y1);
ConvexBody convex_hull(const std::vector<Vec2>& pts, std::optional<Vec2> center = std::nullopt);

BodyMetrics body_metrics(const ConvexBody& body);
double diameter(const ConvexBody& body);
double gauge(const ConvexBody& body, const Vec2& x);
double hausdorff(const ConvexBody& a, const ConvexBody& b);
double segment_distance(const Vec2& p, const Vec2& a, const Vec2& b);

struct BoundarySample {
  Vec2 point;
  Vec2 normal;  // outward; angular average of the two edge normals at a vertex
  bool is_vertex;
};

// At least n points spread by arc length, always including every vertex.
std::vector<BoundarySample> sample_boundary(const ConvexBody& body, int n);

struct DomainApproximation {
  ConvexBody body;
  int index;
  double hausdorff_to_inner;
  double area_excess;
  double alpha;
  double epsilon;
  double diameter_bound;  // diam(inner) + 8 beta / k
};

struct DomainApproxOptions {
  int rays = 720;
  double bisection_tol = 1e-10;
};

// Outer approximation {psi_minus + q < psi_plus + alpha} with psi_- = phi_minus*rho - 1/k,
// psi_+ = phi_plus*rho + 1/k, q = |x - x0|^2 / (2 k diam^2), alpha = 1/(2k).
DomainApproximation approximate_domain(const ConvexBody& inner, const ScalarFn& phi_minus,
                                       const ScalarFn& phi_plus, int k, double mollification_radius,
                                       const DomainApproxOptions& opts = {});
// Same, given x -> (phi_minus - phi_plus)*rho directly; lets callers supply a faster mollification.
DomainApproximation approximate_domain_from_gap(const ConvexBody& inner, const ScalarFn& mollified_gap, int k,
                                                double mollification_radius, const DomainApproxOptions& opts = {});

}  // namespace bscreg
