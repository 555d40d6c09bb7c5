#pragma once

#include "bscreg/barrier.hpp"
#include "bscreg/boundary.hpp"
#include "bscreg/lagrangian.hpp"
#include "bscreg/mesh.hpp"

#include <memory>
#include <optional>

namespace bscreg {

// Sum over triangles of area * F(grad u) (+ (1/k) area |grad u|^2) plus lumped f u.
double energy(const Lagrangian& F, double f, const ScalarField& u, std::optional<double> k = std::nullopt);
double energy(const RegularizedLagrangian& Fk, double f, const ScalarField& u);
double energy(const SmoothedLagrangian& G, double f, const Mesh& mesh, const Eigen::VectorXd& u);

struct MinimizeOptions {
  double tol_grad = 1e-8;   // max nodal gradient <= tol_grad (1 + |E|)
  double tol_step = 1e-10;  // max nodal Newton correction
  int max_iters = 500;
};

struct MinimizeResult {
  Eigen::VectorXd u;
  double energy = 0.0;
  int iterations = 0;
  bool converged = false;
  double grad_norm = 0.0;
  double step_norm = 0.0;
  std::vector<double> trace;
};

// Damped Newton on the smoothed energy; boundary entries of u0 stay fixed.
MinimizeResult minimize(const SmoothedLagrangian& G, double f, const Mesh& mesh, Eigen::VectorXd u0,
                        const MinimizeOptions& opts = {});

enum class InitMode { DatumExtension, ZeroInterior };

struct Problem {
  Problem(ConvexBody b, ScalarFn phi) : body(std::move(b)), datum(std::move(phi)) {}

  ConvexBody body;
  ScalarFn datum;       // boundary values of phi
  std::optional<double> K;  // slope rank; minimal certifiable rank when absent
  int samples = 256;
  Lagrangian F;
  double f = 0.0;
  double h = 1.0 / 16;
  std::vector<int> k_schedule{8, 16, 32, 64, 128};
  bool domain_approximation = true;
  InitMode init = InitMode::DatumExtension;
  MinimizeOptions opts;
};

struct StageRecord {
  int k = 0;           // 0 marks the final solve on the original body
  size_t nodes = 0;
  int iterations = 0;
  bool converged = false;
  double energy = 0.0;  // smoothed energy at the stage minimizer
  double hausdorff = 0.0;
  std::vector<double> trace;
};

struct SolveOutcome {
  ScalarField field;
  double energy = 0.0;           // unsmoothed energy of the final field
  double grad_sup = 0.0;
  double grad_sup_boundary = 0.0;
  int iterations = 0;
  std::vector<int> k_schedule;
  double Q = 0.0;
  double mu_Q = 0.0;
  int q_steps = 0;
  bool converged = false;
  std::vector<StageRecord> stages;
  BarrierConstants constants;
  std::shared_ptr<const BoundaryDatum> datum;
  std::shared_ptr<const DatumExtension> extension;
};

struct QChoice {
  double Q;
  double mu_Q;
  int steps;
};
// Q <- max(2Q, L0/mu_Q + 1) from Q = max(2R, 1) until L0/mu_Q <= Q - 1.
QChoice choose_Q(const Lagrangian& F, double K, double f_sup, double diam);

SolveOutcome solve_pipeline(const Problem& p);

}  // namespace bscreg
