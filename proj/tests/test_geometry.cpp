#include "bscreg/boundary.hpp"
#include "bscreg/mesh.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace bscreg;

TEST_CASE("gauge on the square and the disc") {
  ConvexBody sq = box(-1, -1, 1, 1);
  CHECK(sq.gauge(Vec2(0.5, 0)) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(sq.gauge(Vec2(0.3, -0.9)) == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(sq.gauge(sq.center()) == 0.0);

  // The 64-gon has a vertex on the positive y axis, so the ray hits it exactly.
  ConvexBody disc = regular_polygon(64, 1.0);
  CHECK(disc.gauge(Vec2(0, 2)) == doctest::Approx(2.0).epsilon(1e-12));
  // Mid-edge direction: the polygon boundary sits at cos(pi/64).
  double th = std::numbers::pi / 64;
  CHECK(disc.gauge(2 * Vec2(std::cos(th), std::sin(th))) == doctest::Approx(2 / std::cos(th)).epsilon(1e-12));
}

TEST_CASE("gauge is homogeneous and Lipschitz") {
  ConvexBody body({{0, 0}, {3, 0}, {4, 2}, {1, 3}, {-1, 1}}, Vec2(1, 1));
  const double r = body_metrics(body).inradius;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-5, 5), T(0, 3);
  double hom = 0, lip = -1;
  for (int i = 0; i < 1000; ++i) {
    Vec2 x(U(rng), U(rng)), y(U(rng), U(rng));
    double t = T(rng);
    hom = std::max(hom, std::abs(body.gauge(body.center() + t * (x - body.center())) - t * body.gauge(x)));
    lip = std::max(lip, std::abs(body.gauge(x) - body.gauge(y)) - (x - y).norm() / r);
  }
  CHECK(hom <= 1e-12);
  CHECK(lip <= 1e-12);
}

TEST_CASE("body metrics") {
  BodyMetrics sq = body_metrics(box(-1, -1, 1, 1));
  CHECK(sq.beta == doctest::Approx(std::sqrt(0.5)).epsilon(1e-14));
  CHECK(sq.diameter == doctest::Approx(2 * std::sqrt(2.0)));

  BodyMetrics disc = body_metrics(regular_polygon(128, 1.0));
  CHECK(disc.beta == doctest::Approx(0.5 / std::cos(std::numbers::pi / 128)).epsilon(1e-12));

  // 3-4-5 triangle about its incenter (1, 1): inradius 1, farthest vertex (4, 0).
  BodyMetrics tri = body_metrics(ConvexBody({{0, 0}, {4, 0}, {0, 3}}, Vec2(1, 1)));
  CHECK(tri.diameter == doctest::Approx(5.0));
  CHECK(tri.inradius == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(tri.max_radius == doctest::Approx(std::sqrt(10.0)).epsilon(1e-14));
  CHECK(tri.beta == doctest::Approx(std::sqrt(10.0) / 2).epsilon(1e-14));
}

TEST_CASE("degenerate vertices are merged and bad bodies rejected") {
  ConvexBody b({{0, 0}, {1, 0}, {1, 0}, {2, 0}, {2, 2}, {0, 2}});
  CHECK(b.size() == 4);
  CHECK_THROWS_AS(ConvexBody({{0, 0}, {1, 0}, {2, 0}}), Error);
  CHECK_THROWS_AS(ConvexBody({{0, 0}, {0, 1}, {1, 1}, {1, 0}}), Error);
  CHECK_THROWS_AS(ConvexBody({{0, 0}, {1, 0}, {0, 1}}, Vec2(2, 2)), Error);
}

TEST_CASE("hausdorff distance") {
  CHECK(hausdorff(regular_polygon(64, 1.0), regular_polygon(64, 1.25)) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(hausdorff(box(0, 0, 1, 1), box(0, 0, 1, 1)) == 0.0);
  const double k = 10;
  CHECK(hausdorff(box(-1, -1, 1, 1), box(-1 - 1 / k, -1 - 1 / k, 1 + 1 / k, 1 + 1 / k)) ==
        doctest::Approx(std::sqrt(2.0) / k).epsilon(1e-14));
  ConvexBody a({{0, 0}, {2, 0}, {1, 1}}), b = box(0, 0, 2, 1);
  CHECK(hausdorff(a, b) == doctest::Approx(hausdorff(b, a)));
  CHECK(hausdorff(a, b) == doctest::Approx(std::sqrt(0.5)));
}

TEST_CASE("boundary samples include every vertex") {
  ConvexBody sq = box(-1, -1, 1, 1);
  auto s = sample_boundary(sq, 256);
  CHECK(s.size() >= 256);
  int vertices = 0;
  for (const auto& p : s) {
    CHECK(std::abs(sq.gauge(p.point) - 1.0) <= 1e-12);
    vertices += p.is_vertex;
  }
  CHECK(vertices == 4);
}

TEST_CASE("outer domain approximation of the disc with affine data") {
  ConvexBody disc = regular_polygon(128, 1.0);
  const Vec2 a(0.5, 0.5);
  std::vector<Vec2> pts;
  std::vector<double> vals;
  sample_datum(disc, [&](const Vec2& x) { return a.dot(x); }, 256, pts, vals);
  BoundaryDatum d = certify_bsc_or_throw(disc, pts, vals, a.norm());
  DatumExtension ext(d);
  const BodyMetrics met = body_metrics(disc);

  double prev_area = INFINITY;
  for (int k : {10, 100}) {
    DomainApproximation dom = approximate_domain(disc, ext.minus_fn(), ext.plus_fn(), k, 1 / (2 * (d.K + 1) * k));
    for (const auto& v : disc.vertices()) CHECK(dom.body.gauge(v) <= 1 + 1e-9);
    CHECK(dom.hausdorff_to_inner <= 4 * met.beta / k + 1e-9);
    CHECK(diameter(dom.body) <= met.diameter + 8 * met.beta / k);
    CHECK(dom.area_excess < prev_area);
    prev_area = dom.area_excess;
  }
}

TEST_CASE("outer approximation of the square with the extension's datum") {
  ConvexBody sq = box(-1, -1, 1, 1);
  std::vector<Vec2> pts;
  std::vector<double> vals;
  sample_datum(sq, [](const Vec2& x) { return 0.3 * x.x() - 0.2 * x.y() + 1; }, 256, pts, vals);
  DatumExtension ext(certify_bsc_or_throw(sq, pts, vals, 0.5));
  DomainApproximation dom = approximate_domain(sq, ext.minus_fn(), ext.plus_fn(), 50, 1 / (2 * 1.5 * 50));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-1, 1);
  for (int i = 0; i < 1000; ++i) CHECK(dom.body.contains(Vec2(U(rng), U(rng)), 1e-12));
}

TEST_CASE("triangulation quality") {
  ConvexBody disc = regular_polygon(128, 1.0);
  Mesh m = triangulate(disc, 0.1);
  CHECK(m.min_angle_deg() >= 20.0);
  // The mesh covers the polygon through its boundary nodes, inscribed in the body.
  std::vector<Vec2> ring;
  for (size_t i = 0; i < m.nodes.size(); ++i)
    if (m.boundary[i]) ring.push_back(m.nodes[i]);
  CHECK(m.total_area() == doctest::Approx(convex_hull(ring).area()).epsilon(1e-12));
  CHECK(m.total_area() <= disc.area());
  CHECK(m.total_area() >= disc.area() * (1 - 0.01));
  // Equilateral triangles of side h tile the disc.
  const double expected = std::numbers::pi / (std::sqrt(3.0) / 4 * 0.01);
  CHECK(double(m.tris.size()) > 0.8 * expected);
  CHECK(double(m.tris.size()) < 1.2 * expected);
  for (size_t t = 0; t < m.tris.size(); ++t) CHECK(m.area[t] > 0);

  std::vector<Vec2> bnodes;
  for (size_t i = 0; i < m.nodes.size(); ++i)
    if (m.boundary[i]) bnodes.push_back(m.nodes[i]);
  std::sort(bnodes.begin(), bnodes.end(),
            [](const Vec2& a, const Vec2& b) { return std::atan2(a.y(), a.x()) < std::atan2(b.y(), b.x()); });
  double gap = 0;
  for (size_t i = 0; i < bnodes.size(); ++i) gap = std::max(gap, (bnodes[(i + 1) % bnodes.size()] - bnodes[i]).norm());
  CHECK(gap <= 0.1 + 1e-12);
}

TEST_CASE("triangulation bounds on h") {
  ConvexBody sq = box(0, 0, 1, 1);
  const double diam = std::sqrt(2.0);
  CHECK_NOTHROW(triangulate(sq, diam / 4));
  CHECK_THROWS_AS(triangulate(sq, 0.5), Error);
  CHECK_THROWS_AS(triangulate(sq, 0.0), Error);
  try {
    triangulate(sq, 0.5);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MeshFail);
  }
}

TEST_CASE("transfer reproduces affine fields") {
  auto src = std::make_shared<const Mesh>(triangulate(regular_polygon(64, 1.2), 0.1));
  Mesh dst = triangulate(regular_polygon(64, 1.0), 0.07);
  Eigen::VectorXd u(src->nodes.size());
  for (size_t i = 0; i < src->nodes.size(); ++i) u[long(i)] = 2 * src->nodes[i].x() - src->nodes[i].y() + 0.5;
  Eigen::VectorXd v = transfer(ScalarField{src, u, false}, dst, [](const Vec2&) { return NAN; });
  for (size_t i = 0; i < dst.nodes.size(); ++i)
    CHECK(v[long(i)] == doctest::Approx(2 * dst.nodes[i].x() - dst.nodes[i].y() + 0.5).epsilon(1e-12));
}
