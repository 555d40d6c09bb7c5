#include "bscreg/solver.hpp"
#include "bscreg/verify.hpp"

#include <doctest.h>

#include <Eigen/SparseLU>

#include <cmath>

using namespace bscreg;

namespace {

std::shared_ptr<const Mesh> disc_mesh(double h) { return std::make_shared<const Mesh>(triangulate(regular_polygon(128, 1.0), h)); }

Eigen::VectorXd nodal(const Mesh& m, const ScalarFn& f) {
  Eigen::VectorXd u(m.nodes.size());
  for (size_t i = 0; i < m.nodes.size(); ++i) u[long(i)] = f(m.nodes[i]);
  return u;
}

}  // namespace

TEST_CASE("energy of simple fields") {
  auto m = disc_mesh(0.1);
  Lagrangian F = builtin("torsion_rod");
  const Vec2 g(1.5, -0.5);
  ScalarField u{m, nodal(*m, [&](const Vec2& x) { return g.dot(x); }), true};
  CHECK(energy(F, 0.0, u) == doctest::Approx(m->total_area() * F.value(g)).epsilon(1e-13));
  CHECK(energy(F, 0.0, u, 4.0) == doctest::Approx(m->total_area() * (F.value(g) + g.squaredNorm() / 4)).epsilon(1e-13));
  ScalarField zero{m, Eigen::VectorXd::Zero(long(m->nodes.size())), true};
  CHECK(energy(F, 1.0, zero) == 0.0);
  CHECK(energy(builtin("log_family"), 1.0, zero) == 0.0);
}

TEST_CASE("grad_sup") {
  auto m = disc_mesh(0.2);
  ScalarField u{m, nodal(*m, [](const Vec2& x) { return 3 * x.x() + 4 * x.y(); }), true};
  CHECK(grad_sup(u) == doctest::Approx(5.0).epsilon(1e-12));
  ScalarField z{m, Eigen::VectorXd::Zero(long(m->nodes.size())), true};
  CHECK(grad_sup(z) == 0.0);
}

TEST_CASE("affine data give the affine interpolant") {
  auto m = std::make_shared<const Mesh>(triangulate(box(-1, -1, 1, 1), 0.1));
  const Vec2 a(0.7, -0.2);
  Eigen::VectorXd u0 = nodal(*m, [&](const Vec2& x) { return a.dot(x) + 0.1; });
  for (size_t i = 0; i < m->nodes.size(); ++i)
    if (!m->boundary[i]) u0[long(i)] = 0;
  for (const char* fam : {"torsion_rod", "quadratic", "log_family"}) {
    MinimizeOptions o;
    o.tol_step = 1e-12;
    MinimizeResult r = minimize(SmoothedLagrangian(builtin(fam), 64), 0.0, *m, u0, o);
    CHECK(r.converged);
    double err = 0;
    for (size_t i = 0; i < m->nodes.size(); ++i) err = std::max(err, std::abs(r.u[long(i)] - a.dot(m->nodes[i]) - 0.1));
    CHECK(err <= 1e-8);
    for (size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i] <= r.trace[i - 1] + 1e-12 * (1 + std::abs(r.trace[i - 1])));
  }
}

TEST_CASE("quadratic F matches the discrete normal equations") {
  // The smoothed |z|^2/2 is the quadratic c'|z|^2 with c' = k/(2(k+1)) + 1/k.
  auto m = disc_mesh(1.0 / 16);
  const double k = 32, f = -1;
  FamilyParams p;
  p.scale = 0.5;
  MinimizeResult r = minimize(SmoothedLagrangian(builtin("quadratic", p), k), f, *m,
                              Eigen::VectorXd::Zero(long(m->nodes.size())));
  CHECK(r.converged);

  const double c = k / (2 * (k + 1)) + 1 / k;
  std::vector<long> idx(m->nodes.size(), -1);
  long nf = 0;
  for (size_t i = 0; i < m->nodes.size(); ++i)
    if (!m->boundary[i]) idx[i] = nf++;
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nf);
  for (size_t t = 0; t < m->tris.size(); ++t) {
    Eigen::Matrix3d S = 2 * c * m->area[t] * m->grad_op[t].transpose() * m->grad_op[t];
    for (int i = 0; i < 3; ++i) {
      long I = idx[m->tris[t][i]];
      if (I < 0) continue;
      for (int j = 0; j < 3; ++j)
        if (idx[m->tris[t][j]] >= 0) trip.emplace_back(I, idx[m->tris[t][j]], S(i, j));
    }
  }
  for (size_t i = 0; i < m->nodes.size(); ++i)
    if (idx[i] >= 0) rhs[idx[i]] = -m->lumped[i] * f;
  Eigen::SparseMatrix<double> A(nf, nf);
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(A);
  Eigen::VectorXd x = lu.solve(rhs);
  double err = 0;
  for (size_t i = 0; i < m->nodes.size(); ++i)
    if (idx[i] >= 0) err = std::max(err, std::abs(r.u[long(i)] - x[idx[i]]));
  CHECK(err <= 1e-10);
}

TEST_CASE("discrete energy is convex along segments") {
  auto m = disc_mesh(0.1);
  Lagrangian F = builtin("torsion_rod");
  Eigen::VectorXd a = nodal(*m, [](const Vec2& x) { return std::sin(3 * x.x()) * (1 - x.squaredNorm()); });
  Eigen::VectorXd b = nodal(*m, [](const Vec2& x) { return x.y() * x.y() * (1 - x.squaredNorm()); });
  for (double s : {0.1, 0.5, 0.9}) {
    double mid = energy(F, -2.0, ScalarField{m, s * a + (1 - s) * b, true});
    double chord = s * energy(F, -2.0, ScalarField{m, a, true}) + (1 - s) * energy(F, -2.0, ScalarField{m, b, true});
    CHECK(mid <= chord + 1e-12);
  }
}

TEST_CASE("shifting the datum by a constant shifts the energy by c f |Omega|") {
  auto m = disc_mesh(0.1);
  const double f = -1.5, c = 0.75;
  SmoothedLagrangian G(builtin("torsion_rod"), 32);
  MinimizeOptions o;
  o.tol_step = 1e-12;
  MinimizeResult r0 = minimize(G, f, *m, Eigen::VectorXd::Zero(long(m->nodes.size())), o);
  MinimizeResult r1 = minimize(G, f, *m, Eigen::VectorXd::Constant(long(m->nodes.size()), c), o);
  CHECK((r1.u - r0.u).array().abs().maxCoeff() - c <= 1e-9);
  CHECK((r1.u.array() - r0.u.array() - c).abs().maxCoeff() <= 1e-9);
  CHECK(r1.energy - r0.energy == doctest::Approx(c * f * m->total_area()).epsilon(1e-9));
}

TEST_CASE("truncation level") {
  // Constant modulus: the first update already lands on L0 + 1.
  Lagrangian t = builtin("torsion_rod");
  QChoice q = choose_Q(t, 0.0, 1.0, 2.0);
  const double L0 = constants(0.0, 1.0, 1.0, 1.0, 2.0).L0;
  CHECK(q.Q == L0 + 1);
  CHECK(q.mu_Q == 1.0);
  CHECK(q.steps == 1);

  t.Phi = [](double s) { return s; };
  t.mu.reset();
  QChoice q2 = choose_Q(t, 0.0, 1.0, 2.0);
  CHECK(q2.steps <= 3);

  t.Phi = [](double s) { return 1 / (s * s); };
  try {
    choose_Q(t, 0.0, 1.0, 2.0);
    FAIL("found Q for a decaying modulus");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoQ);
  }
}

TEST_CASE("torsion rod on the disc against the radial oracle") {
  Problem p(regular_polygon(128, 1.0), [](const Vec2&) { return 0.0; });
  p.K = 0.0;
  p.F = builtin("torsion_rod");
  p.f = -1.0;
  p.h = 1.0 / 32;
  p.domain_approximation = false;
  SolveOutcome o = solve_pipeline(p);
  CHECK(o.converged);
  RadialOracle orc = radial_oracle(p.F, 1.0, 1.0, 4096);
  double err = 0;
  for (size_t i = 0; i < o.field.mesh->nodes.size(); ++i) {
    double r = o.field.mesh->nodes[i].norm();
    if (r <= 1 - 2 * p.h) err = std::max(err, std::abs(o.field.values[long(i)] - orc(r)));
  }
  CHECK(err <= 5e-2);
  // Small load: the solution stays in the flat zone.
  CHECK(o.grad_sup <= 1 + p.h);
}

TEST_CASE("pipeline with domain approximation records nonincreasing energies per stage") {
  Problem p(box(-1, -1, 1, 1), [](const Vec2& x) { return 0.5 * x.x() - 0.25 * x.y(); });
  p.F = builtin("torsion_rod");
  p.f = -3.0;
  p.h = 1.0 / 8;
  p.k_schedule = {8, 16};
  SolveOutcome o = solve_pipeline(p);
  CHECK(o.converged);
  REQUIRE(o.stages.size() == 3);
  CHECK(o.stages[0].hausdorff > o.stages[1].hausdorff);
  for (const auto& s : o.stages)
    for (size_t i = 1; i < s.trace.size(); ++i) CHECK(s.trace[i] <= s.trace[i - 1] + 1e-12 * (1 + std::abs(s.trace[i - 1])));
  for (size_t i = 0; i < o.field.mesh->nodes.size(); ++i)
    if (o.field.mesh->boundary[i]) CHECK(o.field.values[long(i)] == p.datum(o.field.mesh->nodes[i]));
}
