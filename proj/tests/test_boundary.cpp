#include "bscreg/boundary.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace bscreg;

namespace {

BoundaryDatum certified(const ConvexBody& body, const ScalarFn& phi, double K, int n = 256) {
  std::vector<Vec2> pts;
  std::vector<double> vals;
  sample_datum(body, phi, n, pts, vals);
  return certify_bsc_or_throw(body, pts, vals, K);
}

}  // namespace

TEST_CASE("affine data are certified at the norm of the slope") {
  const Vec2 a(0.6, -0.8);
  for (const ConvexBody& body : {box(-1, -1, 1, 1), regular_polygon(96, 1.0), ConvexBody({{0, 0}, {4, 0}, {0, 3}})}) {
    BoundaryDatum d = certified(body, [&](const Vec2& x) { return a.dot(x) + 2; }, a.norm());
    CHECK(bsc_violation(d) <= 1e-10);
    for (size_t i = 0; i < d.points.size(); ++i) {
      CHECK(d.zeta_minus[i].norm() <= a.norm() + 1e-12);
      CHECK(d.zeta_plus[i].norm() <= a.norm() + 1e-12);
    }
  }
}

TEST_CASE("a C^{1,1} datum on the disc is certified at its vertices") {
  // Vertices lie on the circle, where zeta- = (2c, 0) and zeta+ = (2c, 0) - 2y both have norm <= 2.
  ConvexBody disc = regular_polygon(128, 1.0);
  auto phi = [](const Vec2& x) { return x.x() * x.x(); };
  BoundaryDatum d = certified(disc, phi, 2.0, 0);
  CHECK(bsc_violation(d) <= 1e-10);
  // On the flat edges x1^2 is strictly convex, so no upper support exists there.
  std::vector<Vec2> pts;
  std::vector<double> vals;
  sample_datum(disc, phi, 256, pts, vals);
  BscResult r = certify_bsc(disc, pts, vals, 100.0);
  REQUIRE_FALSE(r.ok());
  CHECK(r.witness->upper);
}

TEST_CASE("a kink in the middle of a face is rejected") {
  ConvexBody sq = box(-1, -1, 1, 1);
  std::vector<Vec2> pts;
  std::vector<double> vals;
  sample_datum(sq, [](const Vec2& x) { return std::abs(x.x()); }, 256, pts, vals);
  for (double K : {1.0, 10.0, 1e3}) {
    BscResult r = certify_bsc(sq, pts, vals, K);
    REQUIRE_FALSE(r.ok());
    // |x1| is convex but not affine along the horizontal faces: no upper support anywhere on them.
    CHECK(r.witness->upper);
    CHECK(std::abs(std::abs(r.witness->point.y()) - 1) < 1e-12);
    CHECK(std::abs(r.witness->point.x()) < 1 - 1e-12);
  }
  CHECK_THROWS_AS(certify_bsc_or_throw(sq, pts, vals, 10.0), Error);
}

TEST_CASE("rank below the slope is rejected and the minimal rank recovered") {
  ConvexBody disc = regular_polygon(64, 1.0);
  std::vector<Vec2> pts;
  std::vector<double> vals;
  sample_datum(disc, [](const Vec2& x) { return 3 * x.x() + 4 * x.y(); }, 256, pts, vals);
  CHECK_FALSE(certify_bsc(disc, pts, vals, 4.9).ok());
  CHECK(minimal_rank(disc, pts, vals, 10.0, 1e-8) == doctest::Approx(5.0).epsilon(1e-7));
}

TEST_CASE("datum extension") {
  ConvexBody disc = regular_polygon(128, 1.0);
  BoundaryDatum d = certified(disc, [](const Vec2& x) { return x.x() * x.x(); }, 2.0, 0);
  DatumExtension ext(d);
  for (size_t i = 0; i < d.points.size(); ++i) {
    CHECK(std::abs(ext.phi_minus(d.points[i]) - d.values[i]) <= 1e-9);
    CHECK(std::abs(ext.phi_plus(d.points[i]) - d.values[i]) <= 1e-9);
  }
  CHECK(ext.phi_minus(Vec2::Zero()) < 0.0);
  CHECK(ext.phi_plus(Vec2::Zero()) > 0.0);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-2, 2);
  double inside = -INFINITY, outside = INFINITY, lip = -INFINITY;
  for (int i = 0; i < 10000; ++i) {
    Vec2 x(U(rng), U(rng)), y(U(rng), U(rng));
    double gap = ext.phi_minus(x) - ext.phi_plus(x);
    if (disc.gauge(x) < 1) inside = std::max(inside, gap);
    if (disc.gauge(x) > 1) outside = std::min(outside, gap);
    double dq = (x - y).norm();
    lip = std::max(lip, std::abs(ext.phi_minus(x) - ext.phi_minus(y)) / dq - ext.lipschitz_rank());
    lip = std::max(lip, std::abs(ext.phi_plus(x) - ext.phi_plus(y)) / dq - ext.lipschitz_rank());
  }
  CHECK(inside <= 0.0);
  CHECK(outside >= 0.0);
  CHECK(lip <= 1e-8);

  // The restriction of the lower extension satisfies the condition at rank K + 1.
  std::vector<double> vals;
  for (const auto& p : d.points) vals.push_back(ext.phi_minus(p));
  CHECK(certify_bsc(disc, d.points, vals, d.K + 1).ok());
}

TEST_CASE("affine extensions") {
  ConvexBody sq = box(-1, -1, 1, 1);
  const Vec2 a(1, -0.5);
  DatumExtension ext(certified(sq, [&](const Vec2& x) { return a.dot(x); }, a.norm()));
  for (const auto& s : sample_boundary(sq, 64)) {
    CHECK(std::abs(ext.phi_minus(s.point) - a.dot(s.point)) <= 1e-9);
    CHECK(std::abs(ext.phi_plus(s.point) - a.dot(s.point)) <= 1e-9);
  }
}

TEST_CASE("containment margin") {
  const Vec2 a(0.3, 0.4);
  ConvexBody disc = regular_polygon(128, 1.0), sq = box(-1, -1, 1, 1);
  DatumExtension ed(certified(disc, [&](const Vec2& x) { return a.dot(x); }, a.norm()));
  DatumExtension es(certified(sq, [&](const Vec2& x) { return a.dot(x); }, a.norm()));
  CHECK(containment_margin(ed, 0.1) <= 0.05 / std::cos(3.14159265358979 / 128) + 1e-9);
  CHECK(containment_margin(es, 0.1) <= 0.0708);
  for (double s : {0.01, 0.1, 1.0}) {
    CHECK(containment_margin(ed, s) <= body_metrics(disc).beta * s + 1e-9);
    CHECK(containment_margin(es, s) <= body_metrics(sq).beta * s + 1e-9);
  }
  CHECK(containment_margin(es, 1e-6) <= 1e-6);
}

TEST_CASE("pruned mollification agrees with direct quadrature") {
  ConvexBody disc = regular_polygon(64, 1.0);
  std::vector<Vec2> pts;
  std::vector<double> vals;
  sample_datum(disc, [](const Vec2& x) { return x.x() * x.x() - 0.5 * x.y(); }, 0, pts, vals);
  BoundaryDatum d = certify_bsc_or_throw(disc, pts, vals, 3.0);
  DatumExtension ext(d);
  ScalarFn gap = [&](const Vec2& x) { return ext.phi_minus(x) - ext.phi_plus(x); };
  for (double eps : {0.01, 0.05, 0.2})
    for (const Vec2& x : {Vec2(0.3, 0.2), Vec2(1.02, 0.0), Vec2(-0.7, 0.75), Vec2(0.0, -1.3)}) {
      CHECK(std::abs(ext.mollified_gap(x, eps) - mollify(gap, x, eps)) <= 1e-12);
      CHECK(std::abs(ext.mollified_minus(x, eps) - mollify(ext.minus_fn(), x, eps)) <= 1e-12);
    }
}
