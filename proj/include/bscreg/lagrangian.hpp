#pragma once

#include "bscreg/common.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace bscreg {

using Mat2 = Eigen::Matrix2d;

// One convex building block of F: either g(|z|) or g(z_i) with g even, convex,
// nondecreasing on [0, inf). dg is the right derivative (0 at the origin picks
// the minimal-norm subgradient), ddg may be +inf where g is not C^2.
struct Part {
  enum class Kind { Radial, Axis } kind = Kind::Radial;
  int axis = 0;
  std::function<double(double)> g, dg, ddg;
  double dg0 = 0.0;  // right derivative at 0; > 0 means a conical kink
  // Optional closed-form prox: argmin_p g(p) + k/2 (p - t)^2 for t >= 0.
  std::function<double(double t, double k)> prox;
};

struct FamilyParams {
  double mu = 1.0;
  double delta = 0.0;
  double p = 2.0;
  std::vector<double> p_i;
  double scale = 1.0;
};

struct Lagrangian {
  std::string family;
  std::vector<Part> parts;
  double R = 0.0;
  std::function<double(double)> Phi;
  std::optional<double> mu;  // set when Phi is constant
  bool superlinear = true;   // declared lim t Phi(t) = +inf

  double value(const Vec2& z) const;
  Vec2 subgradient(const Vec2& z) const;
  bool isotropic() const;
  // Radial profile F((t, 0)).
  double profile(double t) const { return value(Vec2(t, 0.0)); }
};

Lagrangian builtin(const std::string& name, const FamilyParams& params = {});

// Smooth surrogate used by the solver: Moreau envelope of every part with
// parameter 1/k, plus (1/k)|z|^2.
class SmoothedLagrangian {
 public:
  SmoothedLagrangian(const Lagrangian& F, double k, double extra = -1.0);
  double eval(const Vec2& z, Vec2* grad = nullptr, Mat2* hess = nullptr) const;
  double k() const { return k_; }

 private:
  Lagrangian F_;
  double k_;
  double extra_;
};

double prox_part(const Part& part, double t, double k);

struct Witness {
  Vec2 a = Vec2::Zero();
  Vec2 b = Vec2::Zero();
  double theta = 0.0;
};

struct InequalityResult {
  std::string name;
  double max_violation = 0.0;  // max(rhs - lhs), <= 0 when every sample holds
  Witness witness;
  long samples = 0;
};

struct UcReport {
  InequalityResult convexity;    // (1.3) form with theta in {0.1, ..., 0.9}
  InequalityResult subgradient;  // first-order form with Phi(|a|+|b|)/2
};

double segment_length_outside(const Vec2& z, const Vec2& zp, double R);

UcReport check_phi_uniform_convexity(const Lagrangian& F, long trials, std::uint64_t seed);
std::vector<InequalityResult> uc_inequality_suite(const Lagrangian& F, long trials, std::uint64_t seed);

double superlinearity_radius(const Lagrangian& F, double M);

double mu_Q(const Lagrangian& F, double Q);
double J_Q(double Q, const Vec2& x);
// Smallest eigenvalue of the central finite-difference Hessian of J_Q.
double J_Q_fd_min_eig(double Q, const Vec2& x, double step = 1e-4);
Lagrangian truncate(const Lagrangian& F, double Q);

// Lemma-style approximation F_k = F~_k * rho_eps - 1/k where F~_k is a max over a
// polar generator grid (64 angles, radial step 1/8 out to k; nested in k).
class RegularizedLagrangian {
 public:
  RegularizedLagrangian(const Lagrangian& F, int k);

  double tilde(const Vec2& x) const;
  double value(const Vec2& x) const;
  Vec2 gradient(const Vec2& x) const;
  double hessian_lower_bound(const Vec2& x, double step = 1e-4) const;

  int index() const { return k_; }
  double epsilon() const { return eps_; }
  double mu_prime() const { return mu_prime_; }
  double lipschitz() const { return L_k_; }
  size_t generator_count() const { return y_.size(); }

 private:
  double gen_value(size_t g, const Vec2& x) const;
  Vec2 gen_grad(size_t g, const Vec2& x) const;
  std::vector<int> survivors(const Vec2& x) const;

  const Lagrangian base_;
  int k_;
  double eps_;
  double mu_prime_;
  double L_k_;
  std::vector<Vec2> y_, zeta_;
  std::vector<double> Fy_;
  std::vector<char> quad_;
};

// Lipschitz estimate of F on B_j, 1.1 times the largest generator subgradient.
double lipschitz_on_ball(const Lagrangian& F, int j);
// eps_1..eps_k with eps_1 = min(G-_1, G+_1, 1/2), eps_j = min(G-_j, G+_j, eps_{j-1}).
std::vector<double> epsilon_schedule(const Lagrangian& F, int k);

}  // namespace bscreg
