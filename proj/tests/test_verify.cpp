#include "bscreg/verify.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace bscreg;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("bscreg_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("radial oracle closed forms") {
  RadialOracle z = radial_oracle(builtin("torsion_rod"), 0.0, 1.0, 256);
  for (double v : z.u) CHECK(v == 0.0);

  FamilyParams half;
  half.scale = 0.5;
  RadialOracle q = radial_oracle(builtin("quadratic", half), 1.0, 1.0, 4096);
  double err = 0;
  for (size_t j = 0; j < q.r.size(); ++j) err = std::max(err, std::abs(q.u[j] - (1 - q.r[j] * q.r[j]) / 4));
  CHECK(err <= 1e-6);
  CHECK(q.kkt_residual <= 1e-10);

  // lambda = 4: flat for r < 1/2, u' = -2r beyond.
  RadialOracle t = radial_oracle(builtin("torsion_rod"), 4.0, 1.0, 4096);
  CHECK(t(0.0) == doctest::Approx(0.75).epsilon(1e-3));
  CHECK(t(0.8) == doctest::Approx(1 - 0.64).epsilon(1e-3));
  CHECK(std::abs(t.slope.back()) > 1.9);
  CHECK(t.gradient_jump == doctest::Approx(1.0).epsilon(1e-2));
  CHECK(t.kkt_residual <= 1e-10);
}

TEST_CASE("radial oracle preconditions") {
  FamilyParams p;
  p.p_i = {3.0};
  try {
    radial_oracle(builtin("power_outside_ball", p), 1.0, 1.0, 512);
    FAIL("accepted an anisotropic F");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotIsotropic);
  }
  CHECK_THROWS_AS(radial_oracle(builtin("torsion_rod"), 1.0, 1.0, 100), Error);
}

TEST_CASE("lemma suite") {
  json r = lemma_suite(0, 2000);
  for (const auto& c : r["checks"]) {
    INFO(c.dump());
    CHECK(c["pass"].get<bool>());
  }
  CHECK(r["pass"].get<bool>());
  bool adversarial = false;
  for (const auto& c : r["checks"])
    if (c["name"] == "quadratic_declared_mu_3_rejected") adversarial = c["detail"].contains("a");
  CHECK(adversarial);
}

TEST_CASE("affine experiment is certified and deterministic") {
  json cfg = {{"domain", {{"vertices", {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}}}},
              {"datum", {{"type", "affine"}, {"a", {0.6, 0.3}}, {"b", 0.2}}},
              {"lagrangian", {{"family", "torsion_rod"}}},
              {"h", 0.125},
              {"k_schedule", {8, 16}}};
  auto d1 = scratch("affine1"), d2 = scratch("affine2");
  Certificate c1 = run_experiment(parse_config(cfg), d1.string());
  Certificate c2 = run_experiment(parse_config(cfg), d2.string());
  CHECK(c1.pass);
  for (const char* f : {"certificate.json", "field.csv", "gradients.csv", "energy_trace.csv"}) {
    CHECK(std::filesystem::exists(d1 / f));
    CHECK(slurp(d1 / f) == slurp(d2 / f));
  }
  CHECK(c1.doc["observed"]["affine_error"].get<double>() <= 1e-8);
  CHECK(c1.doc["constants"]["gamma"].get<double>() == 1.5);
  CHECK(c1.doc["constants"]["N"].get<int>() == 2);
}

TEST_CASE("config errors") {
  auto dir = scratch("cfg");
  std::filesystem::create_directories(dir);
  {
    std::ofstream os(dir / "broken.json");
    os << "{\n  \"domain\": {\"shape\": \"disc\"},\n  \"f\": ,\n}\n";
  }
  try {
    load_config((dir / "broken.json").string());
    FAIL("parsed a broken config");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BadInput);
    CHECK(std::string(e.what()).find("broken.json:3") != std::string::npos);
  }
  json p1 = {{"domain", {{"shape", "disc"}}},
             {"lagrangian", {{"family", "log_family"}, {"params", {{"delta", 0.5}, {"p", 1.0}}}}}};
  CHECK_THROWS_AS(parse_config(p1), Error);
  CHECK_THROWS_AS(parse_config(json{{"domain", {{"shape", "disc"}}}}), Error);
}

TEST_CASE("sample data interpolate along the boundary") {
  DatumSpec d;
  d.type = "samples";
  ConvexBody sq = box(-1, -1, 1, 1);
  for (const auto& v : sq.vertices()) {
    d.points.push_back(v);
    d.values.push_back(v.x() + 2 * v.y());
  }
  ScalarFn phi = datum_function(d, sq);
  CHECK(phi(Vec2(1, 0)) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(phi(Vec2(-1, -1)) == doctest::Approx(-3.0).epsilon(1e-14));
  CHECK(phi(Vec2(0, 1)) == doctest::Approx(2.0).epsilon(1e-14));
}
