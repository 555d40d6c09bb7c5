#include "bscreg/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace bscreg {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<Vec2> clean_ring(std::vector<Vec2> v) {
  std::vector<Vec2> out;
  for (const auto& p : v) {
    if (!p.allFinite()) throw Error(ErrorCode::BadInput, "non-finite vertex");
    if (out.empty() || (p - out.back()).norm() >= 1e-12) out.push_back(p);
  }
  while (out.size() > 1 && (out.front() - out.back()).norm() < 1e-12) out.pop_back();

  bool changed = true;
  while (changed && out.size() >= 3) {
    changed = false;
    for (size_t i = 0; i < out.size(); ++i) {
      const Vec2& a = out[(i + out.size() - 1) % out.size()];
      const Vec2& b = out[i];
      const Vec2& c = out[(i + 1) % out.size()];
      Vec2 e1 = b - a, e2 = c - b;
      double cr = cross(e1, e2);
      if (std::abs(cr) <= 1e-14 * e1.norm() * e2.norm()) {
        if (e1.dot(e2) < 0) throw Error(ErrorCode::BadInput, "polygon folds back on itself");
        out.erase(out.begin() + static_cast<long>(i));
        changed = true;
        break;
      }
      if (cr < 0) throw Error(ErrorCode::BadInput, "vertices are not a counter-clockwise convex ring");
    }
  }
  if (out.size() < 3) throw Error(ErrorCode::BadInput, "fewer than 3 vertices after merging");
  return out;
}

}  // namespace

ConvexBody::ConvexBody(std::vector<Vec2> vertices, std::optional<Vec2> center) {
  v_ = clean_ring(std::move(vertices));
  if (center) {
    c_ = *center;
  } else {
    c_ = Vec2::Zero();
    for (const auto& p : v_) c_ += p;
    c_ /= static_cast<double>(v_.size());
  }
  if (!c_.allFinite()) throw Error(ErrorCode::BadInput, "non-finite center");

  const size_t n = v_.size();
  double scale = 0.0;
  for (const auto& p : v_) scale = std::max(scale, (p - c_).norm());
  n_.resize(n);
  h_.resize(n);
  for (size_t e = 0; e < n; ++e) {
    Vec2 d = v_[(e + 1) % n] - v_[e];
    n_[e] = Vec2(d.y(), -d.x()).normalized();
    h_[e] = n_[e].dot(v_[e] - c_);
    if (h_[e] <= 1e-12 * scale) throw Error(ErrorCode::BadInput, "center is not strictly interior");
  }
  ang_.resize(n);
  for (size_t i = 0; i < n; ++i) {
    Vec2 d = v_[i] - c_;
    double a = std::atan2(d.y(), d.x());
    if (i == 0) {
      ang_[i] = a;
    } else {
      while (a <= ang_[i - 1]) a += kTwoPi;
      ang_[i] = a;
    }
  }
}

size_t ConvexBody::edge_for_direction(const Vec2& d) const {
  double a = std::atan2(d.y(), d.x());
  while (a < ang_[0]) a += kTwoPi;
  while (a >= ang_[0] + kTwoPi) a -= kTwoPi;
  auto it = std::upper_bound(ang_.begin(), ang_.end(), a);
  return static_cast<size_t>(it - ang_.begin()) - 1;
}

double ConvexBody::gauge(const Vec2& x) const {
  Vec2 d = x - c_;
  if (d.squaredNorm() == 0.0) return 0.0;
  const size_t n = v_.size();
  size_t e = edge_for_direction(d);
  double g = 0.0;
  for (size_t s : {e + n - 1, e, e + 1}) {
    size_t i = s % n;
    g = std::max(g, n_[i].dot(d) / h_[i]);
  }
  return g;
}

double segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  Vec2 ab = b - a;
  double L2 = ab.squaredNorm();
  double t = L2 > 0 ? std::clamp((p - a).dot(ab) / L2, 0.0, 1.0) : 0.0;
  return (p - (a + t * ab)).norm();
}

double ConvexBody::distance_to_boundary(const Vec2& x) const {
  double best = INFINITY;
  for (size_t e = 0; e < v_.size(); ++e) best = std::min(best, segment_distance(x, v_[e], vertex(e + 1)));
  return best;
}

double ConvexBody::distance(const Vec2& x) const {
  if (gauge(x) <= 1.0) return 0.0;
  return distance_to_boundary(x);
}

Vec2 ConvexBody::ray_hit(const Vec2& dir) const { return c_ + dir / gauge(c_ + dir); }

double ConvexBody::area() const {
  double a = 0.0;
  for (size_t i = 0; i < v_.size(); ++i) a += cross(v_[i], vertex(i + 1));
  return 0.5 * a;
}

double ConvexBody::perimeter() const {
  double p = 0.0;
  for (size_t i = 0; i < v_.size(); ++i) p += (vertex(i + 1) - v_[i]).norm();
  return p;
}

ConvexBody regular_polygon(int n, double radius, const Vec2& center) {
  std::vector<Vec2> v;
  for (int i = 0; i < n; ++i) {
    double t = kTwoPi * i / n;
    v.push_back(center + radius * Vec2(std::cos(t), std::sin(t)));
  }
  return ConvexBody(std::move(v), center);
}

ConvexBody box(double x0, double y0, double x1, double y1) {
  return ConvexBody({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}, Vec2(0.5 * (x0 + x1), 0.5 * (y0 + y1)));
}

ConvexBody convex_hull(const std::vector<Vec2>& pts, std::optional<Vec2> center) {
  std::vector<Vec2> p = pts;
  std::sort(p.begin(), p.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  if (p.size() < 3) throw Error(ErrorCode::BadInput, "hull needs at least 3 points");
  std::vector<Vec2> h(2 * p.size());
  size_t k = 0;
  for (size_t i = 0; i < p.size(); ++i) {
    while (k >= 2 && cross(h[k - 1] - h[k - 2], p[i] - h[k - 2]) <= 0) --k;
    h[k++] = p[i];
  }
  for (size_t i = p.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(h[k - 1] - h[k - 2], p[i] - h[k - 2]) <= 0) --k;
    h[k++] = p[i];
  }
  h.resize(k - 1);
  return ConvexBody(std::move(h), center);
}

double diameter(const ConvexBody& body) {
  double d = 0.0;
  const auto& v = body.vertices();
  for (size_t i = 0; i < v.size(); ++i)
    for (size_t j = i + 1; j < v.size(); ++j) d = std::max(d, (v[i] - v[j]).norm());
  return d;
}

BodyMetrics body_metrics(const ConvexBody& body) {
  BodyMetrics m{};
  m.diameter = diameter(body);
  m.inradius = INFINITY;
  for (size_t e = 0; e < body.size(); ++e) m.inradius = std::min(m.inradius, body.edge_offset(e));
  m.max_radius = 0.0;
  for (const auto& p : body.vertices()) m.max_radius = std::max(m.max_radius, (p - body.center()).norm());
  m.beta = 0.5 * m.max_radius / m.inradius;
  return m;
}

double gauge(const ConvexBody& body, const Vec2& x) { return body.gauge(x); }

double hausdorff(const ConvexBody& a, const ConvexBody& b) {
  // Distance to a convex set is convex, so both one-sided sups sit at vertices.
  double h = 0.0;
  for (const auto& p : a.vertices()) h = std::max(h, b.distance(p));
  for (const auto& p : b.vertices()) h = std::max(h, a.distance(p));
  return h;
}

std::vector<BoundarySample> sample_boundary(const ConvexBody& body, int n) {
  const double spacing = body.perimeter() / std::max(n, 3);
  std::vector<BoundarySample> out;
  const size_t m = body.size();
  for (size_t e = 0; e < m; ++e) {
    const Vec2 a = body.vertex(e), b = body.vertex(e + 1);
    int pieces = std::max(1, static_cast<int>(std::ceil((b - a).norm() / spacing - 1e-9)));
    Vec2 nv = (body.edge_normal((e + m - 1) % m) + body.edge_normal(e)).normalized();
    out.push_back({a, nv, true});
    for (int j = 1; j < pieces; ++j) out.push_back({a + (double(j) / pieces) * (b - a), body.edge_normal(e), false});
  }
  return out;
}

DomainApproximation approximate_domain(const ConvexBody& inner, const ScalarFn& phi_minus,
                                       const ScalarFn& phi_plus, int k, double mollification_radius,
                                       const DomainApproxOptions& opts) {
  ScalarFn gap = [&](const Vec2& x) { return phi_minus(x) - phi_plus(x); };
  ScalarFn smooth = [&](const Vec2& x) { return mollify(gap, x, mollification_radius); };
  return approximate_domain_from_gap(inner, smooth, k, mollification_radius, opts);
}

DomainApproximation approximate_domain_from_gap(const ConvexBody& inner, const ScalarFn& mollified_gap, int k,
                                                double mollification_radius, const DomainApproxOptions& opts) {
  if (k < 1) throw Error(ErrorCode::BadInput, "k must be positive");
  if (!(mollification_radius > 0)) throw Error(ErrorCode::BadInput, "mollification radius must be positive");
  const BodyMetrics met = body_metrics(inner);
  const Vec2 x0 = inner.center();
  const double alpha = 1.0 / (2.0 * k);
  const double qscale = 1.0 / (2.0 * k * met.diameter * met.diameter);
  auto level = [&](const Vec2& x) { return mollified_gap(x) - 2.0 / k + qscale * (x - x0).squaredNorm() - alpha; };

  const int nr = opts.rays;
  std::vector<Vec2> pts(nr);
  std::vector<int> bad(nr, 0);
#pragma omp parallel for schedule(dynamic, 8)
  for (int i = 0; i < nr; ++i) {
    double th = kTwoPi * i / nr;
    Vec2 d(std::cos(th), std::sin(th));
    double lo = (inner.ray_hit(d) - x0).norm();
    if (level(x0 + lo * d) >= 0) {
      bad[i] = 1;
      pts[i] = x0 + lo * d;
      continue;
    }
    double step = std::max(1.0 / k, 1e-3) * met.diameter;
    double hi = lo + step;
    int guard = 0;
    while (level(x0 + hi * d) < 0 && guard++ < 200) {
      lo = hi;
      step *= 2.0;
      hi = lo + step;
    }
    // Illinois regula falsi; falls back to bisection whenever the bracket fails to halve.
    double flo = level(x0 + lo * d), fhi = level(x0 + hi * d);
    int side = 0;
    while (hi - lo > opts.bisection_tol) {
      const double w = hi - lo;
      double x = lo - flo * w / (fhi - flo);
      if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
      for (int pass = 0; pass < 2; ++pass) {
        double fx = level(x0 + x * d);
        if (fx < 0) {
          lo = x, flo = fx;
          if (side == -1) fhi *= 0.5;
          side = -1;
        } else {
          hi = x, fhi = fx;
          if (side == 1) flo *= 0.5;
          side = 1;
        }
        if (hi - lo <= 0.5 * w) break;
        x = 0.5 * (lo + hi);
      }
    }
    pts[i] = x0 + lo * d;
  }
  for (int i = 0; i < nr; ++i)
    if (bad[i]) throw Error(ErrorCode::FailsContainment, "level set does not contain the inner boundary");

  ConvexBody outer = convex_hull(pts, x0);
  for (const auto& p : inner.vertices())
    if (outer.gauge(p) > 1.0 + 1e-9) throw Error(ErrorCode::FailsContainment, "inner vertex outside approximation");

  DomainApproximation out{outer, k, hausdorff(outer, inner), outer.area() - inner.area(), alpha,
                          mollification_radius, met.diameter + 8.0 * met.beta / k};
  return out;
}

}  // namespace bscreg
