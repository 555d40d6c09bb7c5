#include "bscreg/verify.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <random>

namespace bscreg {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

json point(const Vec2& p) { return json::array({p.x(), p.y()}); }

void audit_isotropy(const Lagrangian& F) {
  for (double t : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0}) {
    const double ref = F.value(Vec2(t, 0.0));
    for (int a = 1; a < 16; ++a) {
      double th = kTwoPi * a / 16;
      double v = F.value(t * Vec2(std::cos(th), std::sin(th)));
      if (std::abs(v - ref) > 1e-9)
        throw Error(ErrorCode::NotIsotropic, "F differs by " + std::to_string(std::abs(v - ref)) + " between directions");
    }
  }
}

// Smallest t >= 0 with profile derivative >= tau.
double inverse_derivative(const Lagrangian& F, double tau) {
  auto d = [&](double t) { return F.subgradient(Vec2(t, 0.0)).x(); };
  if (tau <= d(1e-14)) return 0.0;
  double lo = 0.0, hi = 1.0;
  while (d(hi) < tau) {
    lo = hi;
    hi *= 2;
    if (hi > 1e12) throw Error(ErrorCode::NotFound, "profile derivative never reaches the flux");
  }
  for (int i = 0; i < 200 && hi - lo > 1e-15 * (1 + hi); ++i) {
    double mid = 0.5 * (lo + hi);
    (d(mid) < tau ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Check make_check(const std::string& name, bool pass, double value, double tol, json detail = json::object()) {
  return Check{name, pass, value, tol, std::move(detail)};
}

Check inequality_check(const InequalityResult& r, double tol) {
  json w = {{"a", point(r.witness.a)}, {"b", point(r.witness.b)}, {"theta", r.witness.theta}, {"samples", r.samples}};
  return make_check(r.name, r.max_violation <= tol, r.max_violation, tol, w);
}

Lagrangian with_phi(std::function<double(double)> phi, double R) {
  Lagrangian F = builtin("torsion_rod");
  F.R = R;
  F.Phi = std::move(phi);
  F.mu.reset();
  return F;
}

}  // namespace

double RadialOracle::operator()(double rho) const {
  if (rho >= radius) return u.back();
  const double dr = radius / double(r.size() - 1);
  size_t j = std::min(size_t(rho / dr), r.size() - 2);
  double t = (rho - r[j]) / dr;
  return (1 - t) * u[j] + t * u[j + 1];
}

RadialOracle radial_oracle(const Lagrangian& F, double lambda, double radius, int n) {
  if (n < 256) throw Error(ErrorCode::BadInput, "oracle grid needs n >= 256");
  if (!(radius > 0)) throw Error(ErrorCode::BadInput, "oracle radius must be positive");
  audit_isotropy(F);
  RadialOracle o;
  o.lambda = lambda;
  o.radius = radius;
  const double dr = radius / n;
  o.r.resize(n + 1);
  for (int j = 0; j <= n; ++j) o.r[j] = j * dr;
  // Exact integrals of the hat functions against r dr.
  std::vector<double> w(n + 1);
  w[0] = dr * dr / 6;
  for (int j = 1; j < n; ++j) w[j] = o.r[j] * dr;
  w[n] = o.r[n] * dr / 2 - dr * dr / 6;

  o.slope.resize(n);
  double M = 0.0;
  for (int j = 0; j < n; ++j) {
    M += w[j];
    const double rm = (j + 0.5) * dr;
    const double tau = lambda * M / rm;
    o.slope[j] = -std::copysign(inverse_derivative(F, std::abs(tau)), tau);
  }
  o.u.assign(n + 1, 0.0);
  for (int j = n - 1; j >= 0; --j) o.u[j] = o.u[j + 1] - o.slope[j] * dr;

  double E = 0.0;
  for (int j = 0; j < n; ++j) E += kTwoPi * (j + 0.5) * dr * dr * F.profile(std::abs(o.slope[j]));
  for (int j = 0; j <= n; ++j) E -= kTwoPi * lambda * w[j] * o.u[j];
  o.energy = E;

  // Stationarity at interior nodes: the flux difference must balance the load, with the
  // subgradient chosen inside [-dg(0+), dg(0+)] on flat cells.
  double worst = 0.0, load = 0.0;
  std::vector<double> sigma(n);
  double acc = 0.0;
  for (int j = 0; j < n; ++j) sigma[j] = -lambda * (acc += w[j]);
  for (int j = 0; j < n; ++j) {
    const double rm = (j + 0.5) * dr;
    const double s = o.slope[j];
    if (s != 0.0) {
      double g = std::copysign(F.subgradient(Vec2(std::abs(s), 0.0)).x(), s);
      worst = std::max(worst, std::abs(rm * g - sigma[j]));
    } else {
      worst = std::max(worst, std::abs(sigma[j]) / rm - F.subgradient(Vec2(1e-14, 0.0)).x());
    }
    load = std::max(load, std::abs(sigma[j]));
  }
  o.kkt_residual = std::max(0.0, worst) / std::max(load, 1e-300);
  for (int j = 0; j + 1 < n; ++j) o.gradient_jump = std::max(o.gradient_jump, std::abs(o.slope[j + 1] - o.slope[j]));
  return o;
}

json to_json(const Check& c) {
  json j = {{"name", c.name}, {"pass", c.pass}, {"value", c.value}, {"tolerance", c.tolerance}};
  if (!c.detail.empty()) j["detail"] = c.detail;
  return j;
}

json lemma_suite(std::uint64_t seed, long trials) {
  if (trials < 1) throw Error(ErrorCode::BadInput, "trials must be positive");
  std::vector<std::pair<std::string, Check>> checks;
  auto add = [&](const std::string& group, Check c) { checks.emplace_back(group, std::move(c)); };
  const double tol = 1e-9;

  // Uniform convexity inequalities on the two reference Lagrangians.
  const Lagrangian torsion = builtin("torsion_rod");
  const Lagrangian quad = builtin("quadratic");
  for (const auto& [group, F] : {std::pair{"torsion_rod", torsion}, std::pair{"quadratic", quad}})
    for (const auto& r : uc_inequality_suite(F, trials, seed)) add(group, inequality_check(r, tol));

  {
    Lagrangian bad = quad;
    bad.mu = 3.0;
    bad.Phi = [](double) { return 3.0; };
    double worst = -INFINITY;
    InequalityResult hit;
    for (const auto& r : uc_inequality_suite(bad, trials, seed))
      if (r.max_violation > worst) {
        worst = r.max_violation;
        hit = r;
      }
    json w = {{"inequality", hit.name}, {"a", point(hit.witness.a)}, {"b", point(hit.witness.b)}};
    add("adversarial", make_check("quadratic_declared_mu_3_rejected", worst > tol, worst, tol, w));
  }
  {
    Lagrangian loose = torsion;
    loose.R = 0.5;
    UcReport r = check_phi_uniform_convexity(loose, std::min(trials, 20000L), seed);
    double v = std::max(r.convexity.max_violation, r.subgradient.max_violation);
    add("adversarial",
        make_check("torsion_rod_declared_R_half_rejected", v > tol, v, tol,
                   {{"a", point(r.convexity.witness.a)}, {"b", point(r.convexity.witness.b)}}));
  }

  // Superlinearity radius of |z|^2 at M = 4 is exactly 4.
  {
    double r = superlinearity_radius(builtin("quadratic"), 4.0);
    add("superlinearity", make_check("quadratic_radius_M4", std::abs(r - 4.0) <= 1e-6, r - 4.0, 1e-6));
  }

  // F_k: below F, nondecreasing in k, uniform gap on B_2 shrinking.
  {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-2.0, 2.0);
    std::vector<Vec2> xs;
    const long ns = std::min(trials, 1000L);
    while (long(xs.size()) < ns) {
      Vec2 x(U(rng), U(rng));
      if (x.norm() <= 2.0) xs.push_back(x);
    }
    std::vector<std::vector<double>> vals;
    std::vector<double> gaps;
    double above = -INFINITY;
    for (int k : {8, 16, 32}) {
      RegularizedLagrangian Fk(torsion, k);
      std::vector<double> v(xs.size());
#pragma omp parallel for schedule(dynamic, 16)
      for (long i = 0; i < long(xs.size()); ++i) v[i] = Fk.value(xs[i]);
      double gap = 0.0;
      for (size_t i = 0; i < xs.size(); ++i) {
        double d = v[i] - torsion.value(xs[i]);
        above = std::max(above, d);
        gap = std::max(gap, std::abs(d));
      }
      vals.push_back(std::move(v));
      gaps.push_back(gap);
    }
    double mono = -INFINITY;
    for (size_t i = 0; i < xs.size(); ++i)
      mono = std::max({mono, vals[0][i] - vals[1][i], vals[1][i] - vals[2][i]});
    add("approximation", make_check("F_k_below_F", above <= 1e-12, above, 1e-12));
    add("approximation", make_check("F_k_nondecreasing", mono <= 1e-12, mono, 1e-12));
    bool dec = gaps[1] < gaps[0] && gaps[2] < gaps[1];
    add("approximation", make_check("F_k_gap_decreasing", dec, gaps[2], gaps[0], {{"gaps", gaps}}));
  }

  // mu_Q against min{1, min over [2R, 4Q] of Phi} for monotone moduli.
  {
    double worst = 0.0;
    for (double R : {0.25, 1.0})
      for (double Q : {2.0, 5.0, 10.0}) {
        worst = std::max(worst, std::abs(mu_Q(with_phi([](double) { return 1.0; }, R), Q) - 1.0));
        worst = std::max(worst, std::abs(mu_Q(with_phi([](double t) { return t; }, R), Q) - std::min(1.0, 2 * R)));
        worst = std::max(worst, std::abs(mu_Q(with_phi([](double t) { return std::pow(t, -0.5); }, R), Q) -
                                         std::min(1.0, std::pow(4 * Q, -0.5))));
      }
    add("approximation", make_check("mu_Q_closed_form", worst == 0.0, worst, 0.0));
  }

  // J_Q Hessian at |x| >= 2Q.
  {
    std::mt19937_64 rng(seed + 1);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const double Q = 2.0;
    double lo = INFINITY;
    Vec2 arg = Vec2::Zero();
    for (long i = 0; i < std::min(trials, 1000L); ++i) {
      double r = 2 * Q * (1 + 2 * U(rng)), th = kTwoPi * U(rng);
      Vec2 x = r * Vec2(std::cos(th), std::sin(th));
      double e = J_Q_fd_min_eig(Q, x);
      if (e < lo) {
        lo = e;
        arg = x;
      }
    }
    add("approximation", make_check("J_Q_min_eigenvalue", lo >= 1 - 1e-6, lo, 1 - 1e-6, {{"x", point(arg)}}));
  }

  // Bounded slope condition, containment and domain approximation.
  {
    const ConvexBody sq = box(-1, -1, 1, 1);
    const Vec2 a(0.6, -0.8);
    std::vector<Vec2> pts;
    std::vector<double> vals;
    sample_datum(sq, [&](const Vec2& x) { return a.dot(x) + 0.3; }, 256, pts, vals);
    BscResult res = certify_bsc(sq, pts, vals, a.norm());
    add("bsc", make_check("affine_certified_at_norm", res.ok(), res.ok() ? bsc_violation(*res.datum) : 1.0, 1e-10));

    std::vector<Vec2> kp;
    std::vector<double> kv;
    sample_datum(sq, [](const Vec2& x) { return std::abs(x.x()); }, 256, kp, kv);
    BscResult kink = certify_bsc(sq, kp, kv, 100.0);
    json w = kink.witness ? json{{"index", kink.witness->index}, {"point", point(kink.witness->point)},
                                 {"upper", kink.witness->upper}}
                          : json::object();
    add("bsc", make_check("kinked_face_rejected", !kink.ok(), kink.ok() ? 0.0 : 1.0, 0.0, w));

    for (const auto& [label, body] : {std::pair{"square", sq}, std::pair{"disc", regular_polygon(128, 1.0)}}) {
      std::vector<Vec2> p;
      std::vector<double> v;
      sample_datum(body, [&](const Vec2& x) { return a.dot(x) + 0.3; }, 256, p, v);
      BoundaryDatum d = certify_bsc_or_throw(body, p, v, a.norm());
      DatumExtension ext(d);
      const double beta = body_metrics(body).beta;
      for (double s : {0.01, 0.1, 1.0}) {
        double m = containment_margin(ext, s);
        add("bsc", make_check(std::string("containment_") + label + "_s" + std::to_string(s).substr(0, 4),
                              m <= beta * s + 1e-9, m, beta * s + 1e-9));
      }
      const BodyMetrics met = body_metrics(body);
      std::vector<double> haus;
      bool diam_ok = true;
      double worst_ratio = 0.0;
      for (int k : {10, 20, 40, 80}) {
        DomainApproximation dom =
            approximate_domain(ext, k, 1.0 / (2 * (d.K + 1) * k));
        diam_ok = diam_ok && diameter(dom.body) <= met.diameter + 8 * met.beta / k + 1e-12;
        haus.push_back(dom.hausdorff_to_inner);
        worst_ratio = std::max(worst_ratio, dom.hausdorff_to_inner * k / (10 * met.beta));
      }
      bool dec = std::is_sorted(haus.rbegin(), haus.rend()) && haus.back() < haus.front();
      add("domain", make_check(std::string("diameter_bound_") + label, diam_ok, 0.0, 0.0));
      add("domain", make_check(std::string("hausdorff_decreasing_") + label, dec && worst_ratio < 1.0, worst_ratio,
                               1.0, {{"hausdorff", haus}}));
    }
  }

  json out = {{"seed", seed}, {"trials", trials}, {"checks", json::array()}};
  bool all = true;
  for (auto& [g, c] : checks) {
    json j = to_json(c);
    j["group"] = g;
    out["checks"].push_back(j);
    all = all && c.pass;
  }
  out["pass"] = all;
  return out;
}

Certificate run_experiment(const std::string& config_path, const std::string& out_dir) {
  return run_experiment(load_config(config_path), out_dir);
}

Certificate run_experiment(const ExperimentConfig& cfg, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const Problem prob = cfg.problem();
  SolveOutcome o = solve_pipeline(prob);
  const BarrierConstants& c = o.constants;
  const DatumExtension& ext = *o.extension;
  ScalarFn outside = [&ext](const Vec2& x) { return std::max(ext.phi_plus(x), ext.phi_minus(x)); };
  BarrierPair barriers(*o.datum, outside, c);
  SandwichReport sw = sandwich_check(barriers, o.field, cfg.tol.sandwich);

  std::vector<Check> checks;
  checks.push_back(make_check("solver_converged", o.converged, o.iterations, prob.opts.max_iters));
  checks.push_back(make_check("sandwich_lower", sw.lower_margin >= -sw.tolerance, sw.lower_margin, -sw.tolerance,
                              sw.witness >= 0 ? json{{"node", sw.witness}, {"point", point(sw.witness_point)}}
                                              : json::object()));
  checks.push_back(make_check("sandwich_upper", sw.upper_margin >= -sw.tolerance, sw.upper_margin, -sw.tolerance));
  const double Lmu = c.lipschitz_bound();
  checks.push_back(make_check("boundary_gradient_bound", o.grad_sup_boundary <= (1 + cfg.tol.boundary_gradient) * Lmu,
                              o.grad_sup_boundary, (1 + cfg.tol.boundary_gradient) * Lmu));
  double phi_max = 0.0, u_max = o.field.values.cwiseAbs().maxCoeff();
  for (double v : o.datum->values) phi_max = std::max(phi_max, std::abs(v));
  checks.push_back(make_check("linf_bound", u_max <= phi_max + Lmu * c.diam, u_max, phi_max + Lmu * c.diam));
  double rise = 0.0;
  for (const auto& s : o.stages)
    for (size_t i = 1; i < s.trace.size(); ++i)
      rise = std::max(rise, (s.trace[i] - s.trace[i - 1]) / (1 + std::abs(s.trace[i - 1])));
  checks.push_back(make_check("energy_monotone", rise <= cfg.tol.energy_monotone, rise, cfg.tol.energy_monotone));

  json observed = {{"grad_sup", {{"h", cfg.h}, {"value", o.grad_sup}}},
                   {"grad_sup_boundary", o.grad_sup_boundary},
                   {"sup_abs_u", u_max},
                   {"barrier_margins", {{"lower", sw.lower_margin}, {"upper", sw.upper_margin}}},
                   {"energy", o.energy},
                   {"iterations", o.iterations},
                   {"nodes", o.field.mesh->nodes.size()}};

  if (cfg.datum.type == "affine" && cfg.f == 0.0) {
    double err = 0.0;
    for (size_t i = 0; i < o.field.mesh->nodes.size(); ++i)
      err = std::max(err, std::abs(o.field.values[long(i)] - cfg.datum.a.dot(o.field.mesh->nodes[i]) - cfg.datum.b));
    observed["affine_error"] = err;
    checks.push_back(make_check("affine_exactness", err <= cfg.tol.affine, err, cfg.tol.affine));
  }

  std::optional<RadialOracle> oracle;
  if (cfg.oracle) {
    if (std::abs(cfg.f + cfg.oracle->lambda) > 1e-15 || cfg.datum.type != "zero")
      throw Error(ErrorCode::BadInput, "oracle comparison needs f = -lambda and a zero datum");
    const BodyMetrics met = body_metrics(*cfg.body);
    if (cfg.body->center().norm() > 1e-12) throw Error(ErrorCode::BadInput, "oracle needs a disc centered at 0");
    oracle = radial_oracle(*cfg.F, cfg.oracle->lambda, met.max_radius, cfg.oracle->n);
    double err = 0.0;
    const double cut = met.max_radius * (1 - 2 * cfg.h);
    for (size_t i = 0; i < o.field.mesh->nodes.size(); ++i) {
      double r = o.field.mesh->nodes[i].norm();
      if (r <= cut) err = std::max(err, std::abs(o.field.values[long(i)] - (*oracle)(r)));
    }
    observed["oracle_linf"] = err;
    observed["oracle_gradient_jump"] = oracle->gradient_jump;
    checks.push_back(make_check("oracle_linf", err <= cfg.tol.oracle, err, cfg.tol.oracle));
  }

  if (cfg.propagation) {
    SolveOutcome o2 = solve_pipeline(cfg.problem(InitMode::ZeroInterior));
    double gap = 0.0;
    for (size_t t = 0; t < o.field.mesh->tris.size(); ++t)
      gap = std::max(gap, (o.field.mesh->tri_gradient(t, o.field.values) - o.field.mesh->tri_gradient(t, o2.field.values)).norm());
    observed["propagation_gap"] = gap;
    const double bound = 2 * cfg.F->R + cfg.tol.propagation;
    checks.push_back(make_check("propagation_of_regularity", gap <= bound, gap, bound));
  }

  json consts = {{"N", 2},         {"K", c.K},       {"R", c.R},   {"mu", cfg.F->mu ? json(*cfg.F->mu) : json(nullptr)},
                 {"mu_Q", o.mu_Q}, {"Q", o.Q},       {"Lambda", c.Lambda}, {"T", c.T},
                 {"L0", c.L0},     {"L0_over_mu", Lmu}, {"gamma", 1.5}, {"diam", c.diam}};
  json stages = json::array();
  for (const auto& s : o.stages)
    stages.push_back({{"k", s.k}, {"nodes", s.nodes}, {"iterations", s.iterations}, {"converged", s.converged},
                      {"energy", s.energy}, {"hausdorff", s.hausdorff}});

  Certificate cert;
  cert.pass = std::all_of(checks.begin(), checks.end(), [](const Check& x) { return x.pass; });
  json jc = json::array();
  for (const auto& x : checks) jc.push_back(to_json(x));
  cert.doc = {{"constants", consts},
              {"observed", observed},
              {"checks", jc},
              {"stages", stages},
              {"pass", cert.pass},
              {"provenance", {{"config_hash", hex64(fnv1a(cfg.canonical))}, {"seed", cfg.seed}}}};

  const std::filesystem::path dir(out_dir);
  write_atomic((dir / "certificate.json").string(), cert.doc.dump(2) + "\n");
  write_atomic((dir / "field.csv").string(),
               field_csv(o.field, [&](const Vec2& x) { return barriers.lower(x); },
                         [&](const Vec2& x) { return barriers.upper(x); }));
  write_atomic((dir / "gradients.csv").string(), gradients_csv(o.field));
  write_atomic((dir / "energy_trace.csv").string(), trace_csv(o.stages));
  if (oracle) {
    std::ostringstream os;
    os << std::setprecision(17) << "r,u,slope\n";
    for (size_t j = 0; j < oracle->r.size(); ++j)
      os << oracle->r[j] << ',' << oracle->u[j] << ',' << (j < oracle->slope.size() ? oracle->slope[j] : 0.0) << '\n';
    write_atomic((dir / "oracle.csv").string(), os.str());
  }
  return cert;
}

}  // namespace bscreg
