#pragma once

#include "bscreg/solver.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>

namespace bscreg {

using nlohmann::json;

struct DatumSpec {
  std::string type = "zero";  // zero | affine | samples
  Vec2 a = Vec2::Zero();
  double b = 0.0;
  std::vector<Vec2> points;
  std::vector<double> values;
  std::optional<double> K;
};

struct Tolerances {
  double sandwich = 1e-6;
  double affine = 1e-8;
  double oracle = 5e-2;
  double boundary_gradient = 0.1;  // relative slack on L0/mu
  double propagation = 0.5;        // additive slack on 2R
  double energy_monotone = 1e-12;  // relative
};

struct OracleSpec {
  double lambda = 0.0;
  int n = 4096;
};

struct ExperimentConfig {
  std::optional<ConvexBody> body;
  DatumSpec datum;
  std::string family;
  FamilyParams params;
  std::optional<Lagrangian> F;
  double f = 0.0;
  double h = 1.0 / 16;
  std::vector<int> k_schedule{8, 16, 32, 64, 128};
  bool domain_approximation = true;
  int samples = 256;
  MinimizeOptions opts;
  Tolerances tol;
  std::optional<OracleSpec> oracle;
  bool propagation = false;
  std::uint64_t seed = 0;
  std::string canonical;  // compact dump of the parsed JSON, hashed for provenance

  Problem problem(InitMode init = InitMode::DatumExtension) const;
};

std::uint64_t fnv1a(const std::string& s);
std::string hex64(std::uint64_t v);

// Parse with line diagnostics in the error message.
json read_json_file(const std::string& path);

ConvexBody parse_body(const json& j);
DatumSpec parse_datum(const json& j);
Lagrangian parse_lagrangian(const json& j, std::string* family = nullptr, FamilyParams* params = nullptr);
ExperimentConfig parse_config(const json& j);
ExperimentConfig load_config(const std::string& path);

// Boundary function for a datum: affine, zero, or piecewise linear in the polar angle about the center.
ScalarFn datum_function(const DatumSpec& d, const ConvexBody& body);

json body_to_json(const ConvexBody& body);

// Writes path through a temporary file and a rename.
void write_atomic(const std::string& path, const std::string& content);
std::string field_csv(const ScalarField& field, const ScalarFn& lower = nullptr, const ScalarFn& upper = nullptr);
std::string gradients_csv(const ScalarField& field);
std::string trace_csv(const std::vector<StageRecord>& stages);

}  // namespace bscreg
