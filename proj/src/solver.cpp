#include "bscreg/solver.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <cmath>

namespace bscreg {

namespace {

double lumped_load(const Mesh& M, double f, const Eigen::VectorXd& u) {
  double s = 0.0;
  for (size_t i = 0; i < M.nodes.size(); ++i) s += M.lumped[i] * f * u[long(i)];
  return s;
}

// Per-triangle value, gradient and Hessian contributions of the smoothed energy.
struct Assembly {
  double E = 0.0;
  Eigen::VectorXd g;
  std::vector<Eigen::Matrix3d> H;
};

Assembly assemble(const SmoothedLagrangian& G, double f, const Mesh& M, const Eigen::VectorXd& u, bool hessian) {
  const long nt = long(M.tris.size());
  std::vector<double> val(nt);
  std::vector<Eigen::Vector3d> gt(nt);
  Assembly a;
  if (hessian) a.H.resize(nt);
#pragma omp parallel for schedule(static)
  for (long t = 0; t < nt; ++t) {
    const auto& T = M.tris[t];
    const auto& B = M.grad_op[t];
    Vec2 z = B * Eigen::Vector3d(u[T[0]], u[T[1]], u[T[2]]);
    Vec2 gr;
    Mat2 Hz;
    val[t] = M.area[t] * G.eval(z, &gr, hessian ? &Hz : nullptr);
    gt[t] = M.area[t] * B.transpose() * gr;
    if (hessian) a.H[t] = M.area[t] * B.transpose() * Hz * B;
  }
  a.g = Eigen::VectorXd::Zero(long(M.nodes.size()));
  for (long t = 0; t < nt; ++t) {
    a.E += val[t];
    for (int i = 0; i < 3; ++i) a.g[M.tris[t][i]] += gt[t][i];
  }
  for (size_t i = 0; i < M.nodes.size(); ++i) a.g[long(i)] += M.lumped[i] * f;
  a.E += lumped_load(M, f, u);
  return a;
}

}  // namespace

double energy(const Lagrangian& F, double f, const ScalarField& u, std::optional<double> k) {
  const Mesh& M = *u.mesh;
  double E = 0.0;
  for (size_t t = 0; t < M.tris.size(); ++t) {
    Vec2 z = M.tri_gradient(t, u.values);
    E += M.area[t] * F.value(z);
    if (k) E += M.area[t] * z.squaredNorm() / *k;
  }
  return E + lumped_load(M, f, u.values);
}

double energy(const RegularizedLagrangian& Fk, double f, const ScalarField& u) {
  const Mesh& M = *u.mesh;
  double E = 0.0;
  for (size_t t = 0; t < M.tris.size(); ++t) {
    Vec2 z = M.tri_gradient(t, u.values);
    E += M.area[t] * (Fk.value(z) + z.squaredNorm() / Fk.index());
  }
  return E + lumped_load(M, f, u.values);
}

double energy(const SmoothedLagrangian& G, double f, const Mesh& mesh, const Eigen::VectorXd& u) {
  double E = 0.0;
  for (size_t t = 0; t < mesh.tris.size(); ++t) E += mesh.area[t] * G.eval(mesh.tri_gradient(t, u));
  return E + lumped_load(mesh, f, u);
}

MinimizeResult minimize(const SmoothedLagrangian& G, double f, const Mesh& M, Eigen::VectorXd u0,
                        const MinimizeOptions& opts) {
  const long n = long(M.nodes.size());
  if (u0.size() != n) throw Error(ErrorCode::BadInput, "initial field does not match the mesh");
  std::vector<long> idx(n, -1);
  long nf = 0;
  for (long i = 0; i < n; ++i)
    if (!M.boundary[i]) idx[i] = nf++;

  MinimizeResult r;
  r.u = std::move(u0);
  Assembly a = assemble(G, f, M, r.u, true);
  r.energy = a.E;
  r.trace.push_back(a.E);
  if (nf == 0) {
    r.converged = true;
    return r;
  }

  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt;
  bool analysed = false;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(M.tris.size() * 9);
  Eigen::VectorXd gf(nf);

  for (int it = 0; it < opts.max_iters; ++it) {
    trip.clear();
    for (size_t t = 0; t < M.tris.size(); ++t) {
      const auto& T = M.tris[t];
      for (int i = 0; i < 3; ++i) {
        if (idx[T[i]] < 0) continue;
        for (int j = 0; j < 3; ++j)
          if (idx[T[j]] >= 0) trip.emplace_back(idx[T[i]], idx[T[j]], a.H[t](i, j));
      }
    }
    for (long i = 0; i < n; ++i)
      if (idx[i] >= 0) gf[idx[i]] = a.g[i];
    Eigen::SparseMatrix<double> H(nf, nf);
    H.setFromTriplets(trip.begin(), trip.end());
    if (!analysed) {
      llt.analyzePattern(H);
      analysed = true;
    }
    llt.factorize(H);
    if (llt.info() != Eigen::Success) throw Error(ErrorCode::MaxIters, "Hessian factorization failed");
    Eigen::VectorXd d = -llt.solve(gf);

    r.grad_norm = gf.lpNorm<Eigen::Infinity>();
    r.step_norm = d.lpNorm<Eigen::Infinity>();
    r.iterations = it + 1;

    const double slope = gf.dot(d);
    double t = 1.0;
    Eigen::VectorXd trial = r.u;
    auto apply = [&](double s) {
      trial = r.u;
      for (long i = 0; i < n; ++i)
        if (idx[i] >= 0) trial[i] += s * d[idx[i]];
    };
    apply(1.0);
    double Et = energy(G, f, M, trial);
    // Below roundoff the model decrease is invisible in E; take the full step.
    if (-slope > 1e-14 * (1.0 + std::abs(r.energy))) {
      int halvings = 0;
      while (Et > r.energy + 1e-4 * t * slope && halvings++ < 60) {
        t *= 0.5;
        apply(t);
        Et = energy(G, f, M, trial);
      }
      if (Et > r.energy) break;
    }
    r.u = trial;
    a = assemble(G, f, M, r.u, true);
    r.energy = a.E;
    r.trace.push_back(a.E);

    if (r.grad_norm <= opts.tol_grad * (1.0 + std::abs(r.energy)) && r.step_norm <= opts.tol_step) {
      r.converged = true;
      break;
    }
  }
  for (long i = 0; i < n; ++i)
    if (idx[i] >= 0) gf[idx[i]] = a.g[i];
  r.grad_norm = gf.lpNorm<Eigen::Infinity>();
  return r;
}

QChoice choose_Q(const Lagrangian& F, double K, double f_sup, double diam) {
  double Q = std::max(2.0 * F.R, 1.0);
  for (int steps = 0;; ++steps) {
    if (Q > 1e12) throw Error(ErrorCode::NoQ, "no truncation level Q up to 1e12; Phi decays too fast");
    const double m = mu_Q(F, Q);
    if (!(m > 0)) throw Error(ErrorCode::NoQ, "mu_Q vanishes at Q = " + std::to_string(Q));
    const double bound = constants(K, F.R, m, f_sup, diam).L0 / m;
    if (bound <= Q - 1.0) return {Q, m, steps};
    Q = std::max(2.0 * Q, bound + 1.0);
  }
}

SolveOutcome solve_pipeline(const Problem& p) {
  if (p.k_schedule.empty()) throw Error(ErrorCode::BadInput, "empty k schedule");
  if (!(p.h > 0)) throw Error(ErrorCode::BadInput, "mesh size must be positive");
  SolveOutcome out;

  std::vector<Vec2> pts;
  std::vector<double> vals;
  sample_datum(p.body, p.datum, p.samples, pts, vals);
  const double K = p.K ? *p.K : minimal_rank(p.body, pts, vals, 1e4, 1e-9) + 1e-6;
  auto datum = std::make_shared<const BoundaryDatum>(certify_bsc_or_throw(p.body, pts, vals, K));
  auto ext = std::make_shared<const DatumExtension>(*datum);
  out.datum = datum;
  out.extension = ext;

  const double diam = diameter(p.body);
  QChoice qc = choose_Q(p.F, K, p.f, diam);
  out.Q = qc.Q;
  out.mu_Q = qc.mu_Q;
  out.q_steps = qc.steps;
  out.constants = constants(K, p.F.R, qc.mu_Q, p.f, diam);
  const Lagrangian FQ = truncate(p.F, qc.Q);

  auto initial = [&](const Vec2& x) { return p.init == InitMode::ZeroInterior ? 0.0 : ext->phi_minus(x); };
  std::shared_ptr<const Mesh> prev;
  Eigen::VectorXd prev_u;
  out.converged = true;

  auto run_stage = [&](std::shared_ptr<const Mesh> mesh, const ScalarFn& boundary, double k, int label, double haus) {
    Eigen::VectorXd u0(long(mesh->nodes.size()));
    if (prev) {
      u0 = transfer(ScalarField{prev, prev_u, false}, *mesh, initial);
    } else {
      for (size_t i = 0; i < mesh->nodes.size(); ++i) u0[long(i)] = initial(mesh->nodes[i]);
    }
    for (size_t i = 0; i < mesh->nodes.size(); ++i)
      if (mesh->boundary[i]) u0[long(i)] = boundary(mesh->nodes[i]);
    SmoothedLagrangian G(FQ, k);
    MinimizeResult r = minimize(G, p.f, *mesh, u0, p.opts);
    StageRecord s;
    s.k = label;
    s.nodes = mesh->nodes.size();
    s.iterations = r.iterations;
    s.converged = r.converged;
    s.energy = r.energy;
    s.hausdorff = haus;
    s.trace = std::move(r.trace);
    out.stages.push_back(std::move(s));
    out.iterations += r.iterations;
    out.converged = out.converged && r.converged;
    prev = mesh;
    prev_u = std::move(r.u);
  };

  if (p.domain_approximation) {
    for (int k : p.k_schedule) {
      const double eps = 1.0 / (2.0 * (K + 1.0) * k);
      DomainApproximation dom = approximate_domain(*ext, k, eps);
      auto mesh = std::make_shared<const Mesh>(triangulate(dom.body, p.h));
      ScalarFn bvals = [&](const Vec2& x) {
        return std::max(ext->phi_plus(x), ext->mollified_minus(x, eps) - 1.0 / k);
      };
      run_stage(mesh, bvals, k, k, dom.hausdorff_to_inner);
    }
  }
  auto mesh = std::make_shared<const Mesh>(triangulate(p.body, p.h));
  run_stage(mesh, p.datum, p.k_schedule.back(), 0, 0.0);

  out.k_schedule = p.k_schedule;
  out.field = ScalarField{mesh, prev_u, true};
  out.energy = energy(p.F, p.f, out.field);
  out.grad_sup = grad_sup(out.field);
  out.grad_sup_boundary = grad_sup_boundary(out.field);
  return out;
}

}  // namespace bscreg
