#include "bscreg/barrier.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace bscreg;

TEST_CASE("constants") {
  BarrierConstants c = constants(1, 1, 1, 1, 2);
  CHECK(c.Lambda == 2.0);
  CHECK(c.T == doctest::Approx(99.0).epsilon(1e-15));
  CHECK(c.L0 == doctest::Approx(1242.0).epsilon(1e-15));

  BarrierConstants h = constants(1, 1, 0.5, 1, 2);
  CHECK(h.T == doctest::Approx(2 * c.T).epsilon(1e-15));
  CHECK(h.lipschitz_bound() == doctest::Approx(2 * c.lipschitz_bound()).epsilon(1e-15));
  CHECK(constants(1, 1, 1, 0, 2).Lambda == 1.0);

  for (double mu : {0.0, -1.0, 1.5}) {
    try {
      constants(1, 1, mu, 1, 2);
      FAIL("accepted mu outside (0, 1]");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::MuOutOfRange);
    }
  }
}

TEST_CASE("paraboloid") {
  const Vec2 y(1, 0), nu(1, 0);
  CHECK(paraboloid(y, nu, 2, y) == 0.0);
  CHECK(paraboloid(y, nu, 2, Vec2(0, 0.3)) == -7.0);
  for (double s : {-2.0, -1.3, -0.4, 0.0}) {
    Vec2 x = y + s * nu + Vec2(0, 0.7);
    double g = paraboloid_gradient(y, nu, 2, x).norm();
    CHECK(g >= 2);
    CHECK(g <= 4 * 2 + 4);
    CHECK(paraboloid(y, nu, 2, x) <= 0.0);
  }
}

namespace {

struct AffineSetup {
  ConvexBody body = regular_polygon(96, 1.0);
  Vec2 a{0.4, -0.3};
  double b = 0.5;
  BoundaryDatum datum;
  BarrierConstants c;
  AffineSetup() : datum(make()), c(constants(datum.K, 1.0, 1.0, 0.0, diameter(body))) {}
  BoundaryDatum make() {
    std::vector<Vec2> pts;
    std::vector<double> vals;
    sample_datum(body, [&](const Vec2& x) { return a.dot(x) + b; }, 256, pts, vals);
    return certify_bsc_or_throw(body, pts, vals, a.norm());
  }
  double phi(const Vec2& x) const { return a.dot(x) + b; }
};

}  // namespace

TEST_CASE("barriers around an affine datum") {
  AffineSetup s;
  BarrierPair pair(s.datum, [&](const Vec2& x) { return s.phi(x); }, s.c);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(-1, 1);
  for (int i = 0; i < 2000; ++i) {
    Vec2 x(U(rng), U(rng));
    if (!s.body.contains(x)) continue;
    CHECK(pair.lower(x) <= s.phi(x) + 1e-12);
    CHECK(pair.upper(x) >= s.phi(x) - 1e-12);
    for (size_t j = 0; j < s.datum.points.size(); j += 17) {
      CHECK(pair.psi_minus(j, x) <= pair.lower(x));
      CHECK(pair.upper(x) <= pair.psi_plus(j, x));
      CHECK(pair.psi_minus_gradient(j, x).norm() > s.c.R + 1);
    }
  }
  for (size_t j = 0; j < s.datum.points.size(); ++j) {
    CHECK(std::abs(pair.lower(s.datum.points[j]) - s.datum.values[j]) <= 1e-9);
    CHECK(std::abs(pair.upper(s.datum.points[j]) - s.datum.values[j]) <= 1e-9);
  }
  for (int i = 0; i < 1000; ++i) {
    Vec2 x(3 * U(rng), 3 * U(rng));
    if (s.body.contains(x, 1e-9)) continue;
    CHECK(pair.lower(x) == s.phi(x));
    CHECK(pair.upper(x) == s.phi(x));
  }
}

TEST_CASE("barrier Lipschitz audit") {
  AffineSetup s;
  BarrierPair pair(s.datum, [&](const Vec2& x) { return s.phi(x); }, s.c);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> U(-0.9, 0.9);
  double worst = 0;
  int n = 0;
  while (n < 10000) {
    Vec2 x(U(rng), U(rng)), y(U(rng), U(rng));
    if (!s.body.contains(x) || !s.body.contains(y)) continue;
    ++n;
    double d = (x - y).norm();
    worst = std::max(worst, std::abs(pair.lower(x) - pair.lower(y)) / d);
    worst = std::max(worst, std::abs(pair.upper(x) - pair.upper(y)) / d);
  }
  CHECK(worst <= pair.lipschitz_bound() + 1e-8);
}

TEST_CASE("sandwich check") {
  AffineSetup s;
  BarrierPair pair(s.datum, [&](const Vec2& x) { return s.phi(x); }, s.c);
  auto mesh = std::make_shared<const Mesh>(triangulate(s.body, 0.1));
  Eigen::VectorXd u(mesh->nodes.size());
  for (size_t i = 0; i < mesh->nodes.size(); ++i) u[long(i)] = s.phi(mesh->nodes[i]);
  SandwichReport ok = sandwich_check(pair, ScalarField{mesh, u, true});
  CHECK(ok.pass());
  CHECK(ok.witness == -1);

  for (size_t i = 0; i < mesh->nodes.size(); ++i) u[long(i)] = pair.upper(mesh->nodes[i]) + 1;
  SandwichReport bad = sandwich_check(pair, ScalarField{mesh, u, false});
  CHECK_FALSE(bad.pass());
  CHECK(bad.upper_margin == doctest::Approx(-1.0));
  CHECK(bad.witness >= 0);
}
