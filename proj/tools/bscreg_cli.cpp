#include "bscreg/verify.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>

using namespace bscreg;

namespace {

std::string out_path(const std::string& dir, const std::string& file) {
  std::filesystem::create_directories(dir);
  return (std::filesystem::path(dir) / file).string();
}

int check_bsc(const std::string& datum_path, const std::string& body_path, const std::string& out) {
  json j = read_json_file(datum_path);
  DatumSpec d = parse_datum(j);
  if (d.type != "samples") throw Error(ErrorCode::BadInput, "check-bsc expects {\"samples\": [[x, y, v], ...]}");
  if (!d.K) throw Error(ErrorCode::BadInput, "check-bsc needs a rank \"K\"");
  ConvexBody body = !body_path.empty() ? parse_body(read_json_file(body_path))
                    : j.contains("body")   ? parse_body(j["body"])
                                           : convex_hull(d.points);
  BscResult r = certify_bsc(body, d.points, d.values, *d.K);
  json doc;
  if (r.ok()) {
    json s = json::array(), zm = json::array(), zp = json::array();
    for (size_t i = 0; i < r.datum->points.size(); ++i) {
      s.push_back({r.datum->points[i].x(), r.datum->points[i].y(), r.datum->values[i]});
      zm.push_back({r.datum->zeta_minus[i].x(), r.datum->zeta_minus[i].y()});
      zp.push_back({r.datum->zeta_plus[i].x(), r.datum->zeta_plus[i].y()});
    }
    doc = {{"certified", true}, {"K", *d.K}, {"samples", s}, {"zeta_minus", zm}, {"zeta_plus", zp}};
    std::cout << "certified at K = " << *d.K << " over " << s.size() << " samples\n";
  } else {
    const auto& w = *r.witness;
    doc = {{"certified", false},
           {"K", *d.K},
           {"witness", {{"index", w.index}, {"point", {w.point.x(), w.point.y()}}, {"upper", w.upper}}}};
    std::cout << "INFEASIBLE at sample " << w.index << " (" << w.point.x() << ", " << w.point.y() << "), "
              << (w.upper ? "upper" : "lower") << " slope\n";
  }
  write_atomic(out_path(out, "bsc_certificate.json"), doc.dump(2) + "\n");
  return r.ok() ? 0 : 1;
}

int approximate(const std::string& config, int k, const std::string& out) {
  ExperimentConfig cfg = load_config(config);
  Problem p = cfg.problem();
  std::vector<Vec2> pts;
  std::vector<double> vals;
  sample_datum(p.body, p.datum, p.samples, pts, vals);
  const double K = p.K ? *p.K : minimal_rank(p.body, pts, vals, 1e4, 1e-9) + 1e-6;
  DatumExtension ext(certify_bsc_or_throw(p.body, pts, vals, K));
  DomainApproximation d = approximate_domain(p.body, ext.minus_fn(), ext.plus_fn(), k, 1.0 / (2 * (K + 1) * k));
  const BodyMetrics met = body_metrics(p.body);
  json doc = body_to_json(d.body);
  doc["k"] = k;
  doc["epsilon"] = d.epsilon;
  doc["alpha"] = d.alpha;
  doc["hausdorff_to_inner"] = d.hausdorff_to_inner;
  doc["area_excess"] = d.area_excess;
  doc["diameter"] = diameter(d.body);
  doc["diameter_bound"] = met.diameter + 8 * met.beta / k;
  write_atomic(out_path(out, "domain.json"), doc.dump(2) + "\n");
  std::cout << "k = " << k << ": " << d.body.size() << " vertices, hausdorff " << d.hausdorff_to_inner
            << ", diameter " << diameter(d.body) << " <= " << met.diameter + 8 * met.beta / k << "\n";
  return 0;
}

int solve(const std::string& config, const std::string& out) {
  ExperimentConfig cfg = load_config(config);
  SolveOutcome o = solve_pipeline(cfg.problem());
  write_atomic(out_path(out, "field.csv"), field_csv(o.field));
  write_atomic(out_path(out, "gradients.csv"), gradients_csv(o.field));
  write_atomic(out_path(out, "energy_trace.csv"), trace_csv(o.stages));
  json doc = {{"energy", o.energy},          {"grad_sup", o.grad_sup}, {"grad_sup_boundary", o.grad_sup_boundary},
              {"iterations", o.iterations},  {"k_schedule", o.k_schedule}, {"Q", o.Q},
              {"mu_Q", o.mu_Q},              {"converged", o.converged}};
  write_atomic(out_path(out, "outcome.json"), doc.dump(2) + "\n");
  std::cout << "energy " << o.energy << ", grad_sup " << o.grad_sup << ", Q " << o.Q << ", "
            << (o.converged ? "converged" : "MAX_ITERS") << "\n";
  return o.converged ? 0 : 1;
}

int verify(const std::string& config, const std::string& out) {
  Certificate c = run_experiment(config, out);
  for (const auto& ch : c.doc["checks"])
    std::cout << (ch["pass"].get<bool>() ? "PASS " : "FAIL ") << ch["name"].get<std::string>() << "  value "
              << ch["value"].dump() << "  tolerance " << ch["tolerance"].dump() << "\n";
  std::cout << (c.pass ? "all checks pass" : "some checks fail") << "; certificate in " << out << "\n";
  return c.pass ? 0 : 1;
}

int lemmas(std::uint64_t seed, long trials, const std::string& out) {
  json r = lemma_suite(seed, trials);
  for (const auto& ch : r["checks"])
    std::cout << (ch["pass"].get<bool>() ? "PASS " : "FAIL ") << std::left << std::setw(12)
              << ch["group"].get<std::string>() << ch["name"].get<std::string>() << "  " << ch["value"].dump()
              << "\n";
  write_atomic(out_path(out, "lemmas.json"), r.dump(2) + "\n");
  return r["pass"].get<bool>() ? 0 : 1;
}

int oracle(const std::string& config, const std::string& out) {
  ExperimentConfig cfg = load_config(config);
  if (!cfg.oracle) throw Error(ErrorCode::BadInput, "config has no \"oracle\" block");
  RadialOracle o = radial_oracle(*cfg.F, cfg.oracle->lambda, body_metrics(*cfg.body).max_radius, cfg.oracle->n);
  std::ostringstream os;
  os << std::setprecision(17) << "r,u,slope\n";
  for (size_t j = 0; j < o.r.size(); ++j) os << o.r[j] << ',' << o.u[j] << ',' << (j < o.slope.size() ? o.slope[j] : 0.0) << '\n';
  write_atomic(out_path(out, "oracle.csv"), os.str());
  std::cout << "u(0) = " << o.u[0] << ", energy " << o.energy << ", gradient jump " << o.gradient_jump
            << ", stationarity defect " << o.kkt_residual << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  apply_thread_env();
  CLI::App app{"Lipschitz-regular minimizers of degenerate convex functionals with bounded-slope data"};
  app.require_subcommand(1);
  std::string out = "run", path, body;
  int k = 10;
  std::uint64_t seed = 0;
  long trials = 10000;

  auto* c1 = app.add_subcommand("check-bsc", "certify the bounded slope condition of sampled data");
  c1->add_option("datum", path, "datum JSON")->required();
  c1->add_option("--body", body, "body JSON (default: datum's \"body\" or the hull of the samples)");
  auto* c2 = app.add_subcommand("approximate-domain", "outer approximation of the domain at index k");
  c2->add_option("config", path)->required();
  c2->add_option("--k", k, "index k");
  auto* c3 = app.add_subcommand("solve", "run the solver pipeline");
  c3->add_option("config", path)->required();
  auto* c4 = app.add_subcommand("verify", "solve, audit and write a certificate; exit 0 iff all checks pass");
  c4->add_option("config", path)->required();
  auto* c5 = app.add_subcommand("lemmas", "run the inequality and approximation suites");
  c5->add_option("--seed", seed);
  c5->add_option("--trials", trials);
  auto* c6 = app.add_subcommand("oracle", "1-D radial reference solution");
  c6->add_option("config", path)->required();
  for (auto* c : {c1, c2, c3, c4, c5, c6}) c->add_option("--out", out, "run directory");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*c1) return check_bsc(path, body, out);
    if (*c2) return approximate(path, k, out);
    if (*c3) return solve(path, out);
    if (*c4) return verify(path, out);
    if (*c5) return lemmas(seed, trials, out);
    if (*c6) return oracle(path, out);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  return 0;
}
