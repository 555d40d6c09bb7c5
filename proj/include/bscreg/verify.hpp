#pragma once

#include "bscreg/io.hpp"

#include <cstdint>
#include <string>

namespace bscreg {

struct RadialOracle {
  double lambda = 0.0;
  double radius = 1.0;
  std::vector<double> r;  // nodes 0 .. radius
  std::vector<double> u;
  std::vector<double> slope;  // u' on each cell
  double energy = 0.0;
  double kkt_residual = 0.0;  // max nodal stationarity defect, relative to the load
  double gradient_jump = 0.0;  // largest change of u' between neighbouring cells
  double operator()(double rho) const;
};

// Exact discrete minimizer of 2 pi sum r_{j+1/2} F(u'_j) dr - lambda sum w_j u_j with u(radius) = 0,
// obtained from the flux balance sigma_j = -lambda sum_{i<=j} w_i cell by cell.
RadialOracle radial_oracle(const Lagrangian& F, double lambda, double radius, int n);

struct Check {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double tolerance = 0.0;
  json detail;
};

json to_json(const Check& c);

// Every property suite with a fixed seed; "pass" is true iff every check passes.
json lemma_suite(std::uint64_t seed, long trials);

struct Certificate {
  json doc;
  bool pass = false;
};

// Runs the pipeline for a config, audits it and writes certificate.json, field.csv,
// gradients.csv and energy_trace.csv under out_dir.
Certificate run_experiment(const std::string& config_path, const std::string& out_dir);
Certificate run_experiment(const ExperimentConfig& cfg, const std::string& out_dir);

}  // namespace bscreg
