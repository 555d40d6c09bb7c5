#include "bscreg/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace bscreg {

namespace {

using Poly = std::vector<Vec2>;

// Clip a convex polygon by a.z <= b.
Poly clip(const Poly& p, const Vec2& a, double b) {
  Poly out;
  const size_t n = p.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec2& P = p[i];
    const Vec2& Q = p[(i + 1) % n];
    double fp = a.dot(P) - b, fq = a.dot(Q) - b;
    if (fp <= 0) out.push_back(P);
    if ((fp < 0 && fq > 0) || (fp > 0 && fq < 0)) {
      double t = fp / (fp - fq);
      out.push_back(P + t * (Q - P));
    }
  }
  return out;
}

Vec2 min_norm_point(const Poly& p) {
  if (p.size() == 1) return p[0];
  bool inside = true;
  if (p.size() >= 3) {
    for (size_t i = 0; i < p.size(); ++i)
      if (cross(p[(i + 1) % p.size()] - p[i], -p[i]) < 0) inside = false;
  } else {
    inside = false;
  }
  if (inside) return Vec2::Zero();
  Vec2 best = p[0];
  double bd = best.norm();
  for (size_t i = 0; i < p.size(); ++i) {
    const Vec2& a = p[i];
    Vec2 ab = p[(i + 1) % p.size()] - a;
    double L2 = ab.squaredNorm();
    double t = L2 > 0 ? std::clamp(-a.dot(ab) / L2, 0.0, 1.0) : 0.0;
    Vec2 q = a + t * ab;
    if (q.norm() < bd) {
      bd = q.norm();
      best = q;
    }
  }
  return best;
}

// Minimal-norm zeta with <zeta, x_j - y_i> <= v_j - v_i + slack for all j, |zeta| <= K.
std::optional<Vec2> lower_slope(size_t i, const std::vector<Vec2>& pts, const std::vector<double>& vals, double K,
                                double slack) {
  Poly p{{-K, -K}, {K, -K}, {K, K}, {-K, K}};
  for (size_t j = 0; j < pts.size() && !p.empty(); ++j) {
    if (j == i) continue;
    Vec2 a = pts[j] - pts[i];
    if (a.squaredNorm() == 0) continue;
    p = clip(p, a, vals[j] - vals[i] + slack);
  }
  if (p.empty()) return std::nullopt;
  Vec2 z = min_norm_point(p);
  if (z.norm() > K * (1 + 1e-12) + 1e-12) return std::nullopt;
  return z;
}

}  // namespace

void sample_datum(const ConvexBody& body, const ScalarFn& phi, int n, std::vector<Vec2>& points,
                  std::vector<double>& values) {
  points.clear();
  values.clear();
  if (n <= 0) {
    for (const auto& v : body.vertices()) {
      points.push_back(v);
      values.push_back(phi(v));
    }
    return;
  }
  for (const auto& s : sample_boundary(body, n)) {
    points.push_back(s.point);
    values.push_back(phi(s.point));
  }
}

Vec2 outward_normal(const ConvexBody& body, const Vec2& y) {
  const size_t m = body.size();
  double scale = diameter(body);
  size_t best = 0;
  double bd = INFINITY;
  for (size_t e = 0; e < m; ++e) {
    if ((body.vertex(e) - y).norm() <= 1e-12 * scale)
      return (body.edge_normal((e + m - 1) % m) + body.edge_normal(e)).normalized();
    double d = segment_distance(y, body.vertex(e), body.vertex(e + 1));
    if (d < bd) {
      bd = d;
      best = e;
    }
  }
  return body.edge_normal(best);
}

BscResult certify_bsc(const ConvexBody& body, const std::vector<Vec2>& points, const std::vector<double>& values,
                      double K, const BscOptions& opts) {
  if (points.size() < 3 || points.size() != values.size())
    throw Error(ErrorCode::BadInput, "need at least 3 samples with values");
  if (!(K >= 0)) throw Error(ErrorCode::BadInput, "rank must be nonnegative");
  const size_t n = points.size();
  std::vector<double> neg(n);
  for (size_t i = 0; i < n; ++i) neg[i] = -values[i];

  std::vector<Vec2> zm(n), zp(n);
  std::vector<int> fail(n, 0);
#pragma omp parallel for schedule(dynamic, 4)
  for (long li = 0; li < static_cast<long>(n); ++li) {
    size_t i = static_cast<size_t>(li);
    auto lo = lower_slope(i, points, values, K, opts.slack);
    if (!lo) {
      fail[i] = 1;
      continue;
    }
    // Upper support: phi(x) <= phi(y) + <zeta, x - y>  <=>  <-zeta, x - y> <= -phi(x) + phi(y).
    auto up = lower_slope(i, points, neg, K, opts.slack);
    if (!up) {
      fail[i] = 2;
      continue;
    }
    zm[i] = *lo;
    zp[i] = -*up;
  }

  BscResult res;
  for (size_t i = 0; i < n; ++i) {
    if (fail[i]) {
      res.witness = BscWitness{i, points[i], fail[i] == 2};
      return res;
    }
  }
  BoundaryDatum d{body, points, values, {}, zm, zp, K};
  d.normals.reserve(n);
  for (const auto& y : points) d.normals.push_back(outward_normal(body, y));
  res.datum = std::move(d);
  return res;
}

BoundaryDatum certify_bsc_or_throw(const ConvexBody& body, const std::vector<Vec2>& points,
                                   const std::vector<double>& values, double K, const BscOptions& opts) {
  auto r = certify_bsc(body, points, values, K, opts);
  if (!r.ok()) {
    std::ostringstream os;
    os << "bounded slope condition fails at sample " << r.witness->index << " (" << r.witness->point.x() << ", "
       << r.witness->point.y() << "), " << (r.witness->upper ? "upper" : "lower") << " slope, rank " << K;
    throw Error(ErrorCode::Infeasible, os.str());
  }
  return std::move(*r.datum);
}

double bsc_violation(const BoundaryDatum& d) {
  double worst = 0.0;
  const size_t n = d.points.size();
  for (size_t i = 0; i < n; ++i) {
    worst = std::max(worst, d.zeta_minus[i].norm() - d.K);
    worst = std::max(worst, d.zeta_plus[i].norm() - d.K);
    for (size_t j = 0; j < n; ++j) {
      Vec2 dx = d.points[j] - d.points[i];
      worst = std::max(worst, d.values[i] + d.zeta_minus[i].dot(dx) - d.values[j]);
      worst = std::max(worst, d.values[j] - d.values[i] - d.zeta_plus[i].dot(dx));
    }
  }
  return worst;
}

double minimal_rank(const ConvexBody& body, const std::vector<Vec2>& points, const std::vector<double>& values,
                    double hi, double tol) {
  if (!certify_bsc(body, points, values, hi).ok()) throw Error(ErrorCode::Infeasible, "not certifiable at upper rank");
  double lo = 0.0;
  if (certify_bsc(body, points, values, 0.0).ok()) return 0.0;
  while (hi - lo > tol) {
    double mid = 0.5 * (lo + hi);
    (certify_bsc(body, points, values, mid).ok() ? hi : lo) = mid;
  }
  return hi;
}

DatumExtension::DatumExtension(const BoundaryDatum& d) : body_(d.body), K_(d.K) {
  d0_ = body_metrics(body_).inradius;
  auto collect = [&](const std::vector<Vec2>& slopes, bool keep_max) {
    std::vector<Affine> maps;
    for (size_t i = 0; i < d.points.size(); ++i)
      maps.push_back({slopes[i], d.values[i] - slopes[i].dot(d.points[i])});
    // Exact duplicates (typical for affine data) only cost time in the max/min.
    std::sort(maps.begin(), maps.end(), [](const Affine& a, const Affine& b) {
      if (a.slope.x() != b.slope.x()) return a.slope.x() < b.slope.x();
      if (a.slope.y() != b.slope.y()) return a.slope.y() < b.slope.y();
      return a.offset < b.offset;
    });
    std::vector<Affine> out;
    for (const auto& m : maps) {
      if (!out.empty() && (out.back().slope - m.slope).norm() <= 1e-15 &&
          std::abs(out.back().offset - m.offset) <= 1e-14 * (1 + std::abs(m.offset))) {
        out.back().offset = keep_max ? std::max(out.back().offset, m.offset) : std::min(out.back().offset, m.offset);
        continue;
      }
      out.push_back(m);
    }
    return out;
  };
  lower_ = collect(d.zeta_minus, true);
  upper_ = collect(d.zeta_plus, false);
}

double DatumExtension::phi_minus0(const Vec2& x) const {
  double v = -INFINITY;
  for (const auto& m : lower_) v = std::max(v, m.offset + m.slope.dot(x));
  return v;
}

double DatumExtension::phi_plus0(const Vec2& x) const {
  double v = INFINITY;
  for (const auto& m : upper_) v = std::min(v, m.offset + m.slope.dot(x));
  return v;
}

double DatumExtension::phi_minus(const Vec2& x) const { return phi_minus0(x) + d0_ * (body_.gauge(x) - 1.0); }

double DatumExtension::phi_plus(const Vec2& x) const { return phi_plus0(x) + d0_ * (1.0 - body_.gauge(x)); }

ScalarFn DatumExtension::minus_fn() const {
  return [this](const Vec2& x) { return phi_minus(x); };
}

ScalarFn DatumExtension::plus_fn() const {
  return [this](const Vec2& x) { return phi_plus(x); };
}

std::vector<DatumExtension::Affine> DatumExtension::active(const std::vector<Affine>& pieces, const Vec2& x,
                                                           double eps, bool upper) const {
  // For the max (min for upper), a piece can win somewhere in the ball only if its best value there
  // beats the worst value there of the piece winning at x.
  const double sgn = upper ? -1.0 : 1.0;
  double best = -INFINITY, best_slope = 0.0;
  for (const auto& m : pieces) {
    double v = sgn * (m.offset + m.slope.dot(x));
    if (v > best) {
      best = v;
      best_slope = m.slope.norm();
    }
  }
  const double floor = best - best_slope * eps;
  std::vector<Affine> out;
  for (const auto& m : pieces)
    if (sgn * (m.offset + m.slope.dot(x)) + m.slope.norm() * eps >= floor) out.push_back(m);
  return out;
}

double DatumExtension::mollified_minus(const Vec2& x, double eps) const {
  const auto lo = active(lower_, x, eps, false);
  const auto& rule = MollifierRule::get();
  double s = 0.0;
  for (size_t q = 0; q < rule.offsets.size(); ++q) {
    Vec2 y = x - eps * rule.offsets[q];
    double v = -INFINITY;
    for (const auto& m : lo) v = std::max(v, m.offset + m.slope.dot(y));
    s += rule.weights[q] * (v + d0_ * (body_.gauge(y) - 1.0));
  }
  return s;
}

double DatumExtension::mollified_gap(const Vec2& x, double eps) const {
  const auto lo = active(lower_, x, eps, false);
  const auto up = active(upper_, x, eps, true);
  const auto& rule = MollifierRule::get();
  double s = 0.0;
  for (size_t q = 0; q < rule.offsets.size(); ++q) {
    Vec2 y = x - eps * rule.offsets[q];
    double a = -INFINITY, b = INFINITY;
    for (const auto& m : lo) a = std::max(a, m.offset + m.slope.dot(y));
    for (const auto& m : up) b = std::min(b, m.offset + m.slope.dot(y));
    s += rule.weights[q] * (a - b + 2.0 * d0_ * (body_.gauge(y) - 1.0));
  }
  return s;
}

DomainApproximation approximate_domain(const DatumExtension& ext, int k, double mollification_radius,
                                       const DomainApproxOptions& opts) {
  ScalarFn gap = [&](const Vec2& x) { return ext.mollified_gap(x, mollification_radius); };
  return approximate_domain_from_gap(ext.body(), gap, k, mollification_radius, opts);
}

double containment_margin(const DatumExtension& ext, double s, int rays) {
  const ConvexBody& body = ext.body();
  const Vec2 x0 = body.center();
  const double diam = diameter(body);
  auto over = [&](const Vec2& x) { return ext.phi_minus(x) - ext.phi_plus(x) > s; };
  double margin = 0.0;
#pragma omp parallel for reduction(max : margin)
  for (int i = 0; i < rays; ++i) {
    double th = 2.0 * std::numbers::pi * i / rays;
    Vec2 d(std::cos(th), std::sin(th));
    double lo = (body.ray_hit(d) - x0).norm();
    if (over(x0 + lo * d)) continue;
    double step = 0.01 * diam + s;
    double hi = lo + step;
    int guard = 0;
    while (!over(x0 + hi * d) && guard++ < 200) {
      lo = hi;
      step *= 2;
      hi = lo + step;
    }
    while (hi - lo > 1e-13 * (1 + hi)) {
      double mid = 0.5 * (lo + hi);
      (over(x0 + mid * d) ? hi : lo) = mid;
    }
    margin = std::max(margin, body.distance(x0 + lo * d));
  }
  return margin;
}

}  // namespace bscreg
