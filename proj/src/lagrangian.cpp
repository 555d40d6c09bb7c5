#include "bscreg/lagrangian.hpp"

#include "bscreg/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace bscreg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double curvature(double ddg, double k) {
  if (!std::isfinite(ddg)) return k;
  return k * ddg / (k + ddg);
}

Part radial(std::function<double(double)> g, std::function<double(double)> dg, std::function<double(double)> ddg,
            double dg0 = 0.0) {
  Part p;
  p.kind = Part::Kind::Radial;
  p.g = std::move(g);
  p.dg = std::move(dg);
  p.ddg = std::move(ddg);
  p.dg0 = dg0;
  return p;
}

double min_eig(const Mat2& H) {
  double a = H(0, 0), b = 0.5 * (H(0, 1) + H(1, 0)), c = H(1, 1);
  double m = 0.5 * (a + c), d = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
  return m - d;
}

}  // namespace

double Lagrangian::value(const Vec2& z) const {
  double v = 0.0;
  for (const auto& p : parts) v += p.kind == Part::Kind::Radial ? p.g(z.norm()) : p.g(std::abs(z[p.axis]));
  return v;
}

Vec2 Lagrangian::subgradient(const Vec2& z) const {
  Vec2 s = Vec2::Zero();
  for (const auto& p : parts) {
    if (p.kind == Part::Kind::Radial) {
      double t = z.norm();
      if (t > 0) s += p.dg(t) * z / t;
    } else {
      double t = z[p.axis];
      if (t != 0) s[p.axis] += std::copysign(p.dg(std::abs(t)), t);
    }
  }
  return s;
}

bool Lagrangian::isotropic() const {
  return std::all_of(parts.begin(), parts.end(), [](const Part& p) { return p.kind == Part::Kind::Radial; });
}

Lagrangian builtin(const std::string& name, const FamilyParams& prm) {
  Lagrangian F;
  F.family = name;
  if (name == "torsion_rod") {
    Part p = radial([](double t) { return t <= 1 ? t : 0.5 * t * t + 0.5; },
                    [](double t) { return t <= 1 ? 1.0 : t; }, [](double t) { return t < 1 ? 0.0 : 1.0; }, 1.0);
    p.prox = [](double t, double k) {
      if (t <= 1.0 / k) return 0.0;
      if (t - 1.0 / k <= 1.0) return t - 1.0 / k;
      return t * k / (k + 1.0);
    };
    F.parts.push_back(p);
    F.R = 1.0;
    F.Phi = [](double) { return 1.0; };
    F.mu = 1.0;
  } else if (name == "quadratic") {
    const double c = prm.scale;
    if (!(c > 0)) throw Error(ErrorCode::BadParams, "quadratic scale must be positive");
    Part p = radial([c](double t) { return c * t * t; }, [c](double t) { return 2 * c * t; },
                    [c](double) { return 2 * c; });
    p.prox = [c](double t, double k) { return t / (1.0 + 2.0 * c / k); };
    F.parts.push_back(p);
    F.R = 0.0;
    F.Phi = [c](double) { return 2 * c; };
    F.mu = 2 * c;
  } else if (name == "power_outside_ball") {
    const double mu = prm.mu, delta = prm.delta, pw = prm.p;
    if (!(mu > 0) || !(delta >= 0) || !(pw > 1)) throw Error(ErrorCode::BadParams, "need mu > 0, delta >= 0, p > 1");
    for (double q : prm.p_i)
      if (!(q > 1)) throw Error(ErrorCode::BadParams, "every p_i must exceed 1");
    if (prm.p_i.size() > 2) throw Error(ErrorCode::BadParams, "at most N = 2 exponents p_i");
    const double R0 = std::pow(delta, 1.0 / pw);
    F.parts.push_back(radial([=](double t) { return mu * std::max(std::pow(t, pw) - delta, 0.0); },
                             [=](double t) { return t > R0 ? mu * pw * std::pow(t, pw - 1) : 0.0; },
                             [=](double t) { return t > R0 ? mu * pw * (pw - 1) * std::pow(t, pw - 2) : 0.0; }));
    for (size_t i = 0; i < prm.p_i.size(); ++i) {
      const double q = prm.p_i[i];
      Part a;
      a.kind = Part::Kind::Axis;
      a.axis = static_cast<int>(i);
      a.g = [q](double t) { return std::pow(t, q); };
      a.dg = [q](double t) { return q * std::pow(t, q - 1); };
      a.ddg = [q](double t) { return t > 0 ? q * (q - 1) * std::pow(t, q - 2) : (q < 2 ? kInf : (q == 2 ? 2.0 : 0.0)); };
      F.parts.push_back(a);
    }
    if (pw < 2) {
      F.R = R0;
      F.Phi = [=](double s) { return mu * pw * (pw - 1) * std::pow(s, pw - 2); };
    } else {
      F.R = (pw == 2 || delta > 0) ? R0 : 1.0;
      const double c = mu * pw * std::pow(F.R, pw - 2);
      F.Phi = [c](double) { return c; };
      F.mu = c;
    }
  } else if (name == "log_family") {
    const double delta = prm.delta, pw = prm.p;
    if (!(delta >= 0) || !(pw > 1))
      throw Error(ErrorCode::BadParams, "log family needs delta >= 0 and p > 1 (p = 1 is not superlinear)");
    auto dg = [=](double t) {
      if (t <= delta) return 0.0;
      double L = std::log1p(t);
      return std::pow(L, pw) + pw * (t - delta) * std::pow(L, pw - 1) / (1 + t);
    };
    auto ddg = [=](double t) {
      if (t <= delta) return 0.0;
      double L = std::log1p(t);
      return pw * std::pow(L, pw - 2) / ((1 + t) * (1 + t)) * (L * (2 + t + delta) + (t - delta) * (pw - 1));
    };
    F.parts.push_back(
        radial([=](double t) { return std::max(t - delta, 0.0) * std::pow(std::log1p(t), pw); }, dg, ddg));
    F.R = delta > 0 ? delta : 1.0;
    const double R = F.R;
    // Smallest Hessian eigenvalue of g(|z|) over |z| in [R, s], sampled, with a 0.9 margin.
    F.Phi = [=](double s) {
      double hi = std::max(s, R * (1 + 1e-9));
      double lo = R * (1 + 1e-9);
      double m = kInf;
      const int n = 256;
      for (int i = 0; i <= n; ++i) {
        double t = lo * std::pow(hi / lo, double(i) / n);
        m = std::min({m, ddg(t), dg(t) / t});
      }
      return 0.9 * m;
    };
  } else {
    throw Error(ErrorCode::BadParams, "unknown family '" + name + "'");
  }
  return F;
}

double prox_part(const Part& part, double t, double k) {
  if (part.prox) return part.prox(t, k);
  if (t <= part.dg0 / k) return 0.0;
  double lo = 0.0, hi = t, p = t;
  for (int it = 0; it < 200; ++it) {
    double f = p + part.dg(p) / k - t;
    if (f > 0) hi = p; else lo = p;
    double d = 1.0 + part.ddg(p) / k;
    double pn = std::isfinite(d) ? p - f / d : 0.5 * (lo + hi);
    if (!(pn > lo && pn < hi)) pn = 0.5 * (lo + hi);
    if (std::abs(pn - p) <= 1e-15 * t || hi - lo <= 1e-15 * t) {
      p = pn;
      break;
    }
    p = pn;
  }
  return p;
}

SmoothedLagrangian::SmoothedLagrangian(const Lagrangian& F, double k, double extra)
    : F_(F), k_(k), extra_(extra < 0 ? 1.0 / k : extra) {}

double SmoothedLagrangian::eval(const Vec2& z, Vec2* grad, Mat2* hess) const {
  const double k = k_;
  double v = extra_ * z.squaredNorm();
  if (grad) *grad = 2 * extra_ * z;
  if (hess) *hess = 2 * extra_ * Mat2::Identity();
  for (const auto& part : F_.parts) {
    if (part.kind == Part::Kind::Radial) {
      double t = z.norm();
      double p = prox_part(part, t, k);
      v += part.g(p) + 0.5 * k * (t - p) * (t - p);
      if (t > 0) {
        Vec2 u = z / t;
        if (grad) *grad += k * (t - p) * u;
        if (hess) {
          double cr = p > 0 ? curvature(part.ddg(p), k) : k;
          double ct = p > 0 ? k * (t - p) / t : k;
          if (p == 0 && part.dg0 == 0) cr = ct = curvature(part.ddg(0.0), k);
          *hess += cr * u * u.transpose() + ct * (Mat2::Identity() - u * u.transpose());
        }
      } else if (hess) {
        double c = part.dg0 > 0 ? k : curvature(part.ddg(0.0), k);
        *hess += c * Mat2::Identity();
      }
    } else {
      const int i = part.axis;
      double s = z[i], t = std::abs(s);
      double p = prox_part(part, t, k);
      v += part.g(p) + 0.5 * k * (t - p) * (t - p);
      if (grad) (*grad)[i] += std::copysign(k * (t - p), s);
      if (hess) {
        double c = p > 0 ? curvature(part.ddg(p), k) : (part.dg0 > 0 ? k : curvature(part.ddg(0.0), k));
        (*hess)(i, i) += c;
      }
    }
  }
  return v;
}

double segment_length_outside(const Vec2& z, const Vec2& zp, double R) {
  Vec2 d = zp - z;
  double L = d.norm();
  if (L == 0) return 0.0;
  if (R <= 0) return L;
  double a = d.squaredNorm(), b = 2 * z.dot(d), c = z.squaredNorm() - R * R;
  double disc = b * b - 4 * a * c;
  if (disc <= 0) return L;
  double sq = std::sqrt(disc);
  double t1 = (-b - sq) / (2 * a), t2 = (-b + sq) / (2 * a);
  double inside = std::max(0.0, std::min(1.0, t2) - std::max(0.0, t1));
  return L * (1.0 - inside);
}

namespace {

struct Sampler {
  std::mt19937_64 rng;
  std::uniform_real_distribution<double> U{0.0, 1.0};
  explicit Sampler(std::uint64_t seed) : rng(seed) {}
  double u() { return U(rng); }
  Vec2 in_annulus(double r0, double r1) {
    double r = std::sqrt(r0 * r0 + (r1 * r1 - r0 * r0) * u());
    double th = 2 * std::numbers::pi * u();
    return r * Vec2(std::cos(th), std::sin(th));
  }
  Vec2 in_disc(double r) { return in_annulus(0.0, r); }
};

double origin_distance(const Vec2& a, const Vec2& b) { return segment_distance(Vec2::Zero(), a, b); }

void record(InequalityResult& r, double viol, const Vec2& a, const Vec2& b, double theta = 0.0) {
  ++r.samples;
  if (r.samples == 1 || viol > r.max_violation) {
    r.max_violation = viol;
    r.witness = {a, b, theta};
  }
}

}  // namespace

UcReport check_phi_uniform_convexity(const Lagrangian& F, long trials, std::uint64_t seed) {
  if (trials < 1) throw Error(ErrorCode::BadInput, "trials must be positive");
  Sampler S(seed);
  const double R = F.R, span = std::max(R, 1.0);
  const double box = 2 * R + 4;
  UcReport rep;
  rep.convexity.name = "uniform_convexity";
  rep.subgradient.name = "uniform_convexity_subgradient";
  for (long n = 0; n < trials; ++n) {
    Vec2 a, b;
    bool found = false;
    for (int att = 0; att < 10000 && !found; ++att) {
      if (n % 2 == 0) {
        a = S.in_disc(box);
        b = S.in_disc(box);
      } else {
        // Near the sphere |z| = R, where a mis-declared radius shows up.
        a = S.in_annulus(R, R + 0.5 * span);
        b = a + S.in_disc(0.5 * span);
      }
      found = origin_distance(a, b) >= R;
    }
    if (!found) continue;
    const double Fa = F.value(a), Fb = F.value(b);
    const double phi = F.Phi(a.norm() + b.norm());
    const double d2 = (a - b).squaredNorm();
    for (int i = 1; i <= 9; ++i) {
      double th = 0.1 * i;
      double v = F.value(th * a + (1 - th) * b) - th * Fa - (1 - th) * Fb + 0.5 * th * (1 - th) * phi * d2;
      record(rep.convexity, v, a, b, th);
    }
    record(rep.subgradient, Fa + F.subgradient(a).dot(b - a) + 0.5 * phi * d2 - Fb, a, b);
    record(rep.subgradient, Fb + F.subgradient(b).dot(a - b) + 0.5 * phi * d2 - Fa, b, a);
  }
  return rep;
}

std::vector<InequalityResult> uc_inequality_suite(const Lagrangian& F, long trials, std::uint64_t seed) {
  if (!F.mu) throw Error(ErrorCode::BadParams, "inequality suite needs a constant modulus mu");
  const double mu = *F.mu, R = F.R;
  const double box = 4 * R + 4;
  Sampler S(seed);
  auto any_point = [&](long n) { return n % 2 == 0 ? S.in_disc(box) : S.in_annulus(0.0, 2 * R + 1); };
  auto far_point = [&](long n) { return n % 2 == 0 ? S.in_annulus(2 * R, box) : S.in_annulus(2 * R, 2 * R + 1); };

  UcReport def = check_phi_uniform_convexity(F, trials, seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<InequalityResult> out{def.convexity, def.subgradient};

  auto named = [](const char* n) {
    InequalityResult r;
    r.name = n;
    return r;
  };
  InequalityResult a5 = named("growth_outside_ball"), a8 = named("growth_far"), a9 = named("monotone_far"),
                   a10 = named("convex_combination_far"), a11 = named("quadratic_lower_bound"),
                   a12 = named("segment_outside_third");
  const double F0 = std::abs(F.value(Vec2::Zero()));
  const double z0 = F.subgradient(Vec2::Zero()).squaredNorm();
  for (long n = 0; n < trials; ++n) {
    {
      Vec2 x = any_point(n), y = any_point(n + 1);
      double H = segment_length_outside(x, y, R);
      record(a5, F.value(x) + F.subgradient(x).dot(y - x) + 0.25 * mu * H * H - F.value(y), x, y);
    }
    {
      Vec2 x = any_point(n), y = far_point(n);
      if (n % 4 >= 2) std::swap(x, y);
      double d2 = (x - y).squaredNorm();
      record(a8, F.value(x) + F.subgradient(x).dot(y - x) + mu / 36 * d2 - F.value(y), x, y);
      record(a9, mu / 18 * d2 - (F.subgradient(x) - F.subgradient(y)).dot(x - y), x, y);
    }
    {
      Vec2 x = far_point(n), y = far_point(n + 1);
      double th = S.u();
      double v = F.value(th * x + (1 - th) * y) - th * F.value(x) - (1 - th) * F.value(y) +
                 mu / 36 * th * (1 - th) * (x - y).squaredNorm();
      record(a10, v, x, y, th);
    }
    {
      Vec2 x = any_point(n);
      record(a11, mu / 72 * x.squaredNorm() - (F0 + 18 / mu * z0) - F.value(x), x, Vec2::Zero());
    }
    {
      Vec2 x = any_point(n), y = far_point(n);
      record(a12, (x - y).norm() / 3 - segment_length_outside(x, y, R), x, y);
    }
  }
  for (auto* r : {&a5, &a8, &a9, &a10, &a11, &a12}) out.push_back(*r);
  return out;
}

double superlinearity_radius(const Lagrangian& F, double M) {
  if (!(M > 0)) throw Error(ErrorCode::BadInput, "M must be positive");
  const int dirs = 64;
  double r_all = 0.0;
  for (int d = 0; d < dirs; ++d) {
    double th = 2 * std::numbers::pi * d / dirs;
    Vec2 w(std::cos(th), std::sin(th));
    auto g = [&](double r) { return F.value(r * w) - M * r; };
    auto slope = [&](double r) { return F.subgradient(r * w).dot(w) - M; };
    double b = 1.0;
    while (!(g(b) >= 0 && slope(b) >= 0)) {
      b *= 2;
      if (b > 1e6) throw Error(ErrorCode::NotFound, "F(xi) >= M|xi| not reached below radius 1e6");
    }
    // g is convex on [0, b] with g(b) >= 0 and g'(b) >= 0: {g < 0} is an interval ending at the answer.
    double lo = 0.0, hi = b;
    for (int it = 0; it < 200; ++it) {
      double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
      if (g(m1) <= g(m2))
        hi = m2;
      else
        lo = m1;
    }
    double rmin = 0.5 * (lo + hi);
    const double tol = 1e-12 * (1 + std::abs(F.value(Vec2::Zero())));
    if (g(rmin) >= -tol) continue;
    lo = rmin;
    hi = b;
    while (hi - lo > 1e-12 * (1 + hi)) {
      double mid = 0.5 * (lo + hi);
      (g(mid) < -tol ? lo : hi) = mid;
    }
    r_all = std::max(r_all, hi);
  }
  return r_all;
}

double mu_Q(const Lagrangian& F, double Q) {
  const double a = F.R > 0 ? 2 * F.R : 1e-12, b = 4 * Q;
  double m = std::min(F.Phi(a), F.Phi(b));
  const int n = 4096;
  for (int i = 1; i < n; ++i) {
    m = std::min(m, F.Phi(a + (b - a) * i / n));
    m = std::min(m, F.Phi(a * std::pow(b / a, double(i) / n)));
  }
  return std::min(1.0, m);
}

double J_Q(double Q, const Vec2& x) {
  double s = std::max(x.norm() - Q, 0.0);
  return s * s;
}

double J_Q_fd_min_eig(double Q, const Vec2& x, double h) {
  Mat2 H;
  const Vec2 e0(h, 0), e1(0, h);
  double J = J_Q(Q, x);
  H(0, 0) = (J_Q(Q, x + e0) - 2 * J + J_Q(Q, x - e0)) / (h * h);
  H(1, 1) = (J_Q(Q, x + e1) - 2 * J + J_Q(Q, x - e1)) / (h * h);
  H(0, 1) = H(1, 0) =
      (J_Q(Q, x + e0 + e1) - J_Q(Q, x + e0 - e1) - J_Q(Q, x - e0 + e1) + J_Q(Q, x - e0 - e1)) / (4 * h * h);
  return min_eig(H);
}

Lagrangian truncate(const Lagrangian& F, double Q) {
  if (!(Q > F.R)) throw Error(ErrorCode::BadParams, "truncation radius must exceed R");
  const double m = mu_Q(F, Q);
  Lagrangian G = F;
  G.family = F.family + "+truncated";
  Part p = radial([=](double t) { return t > Q ? m * (t - Q) * (t - Q) : 0.0; },
                  [=](double t) { return t > Q ? 2 * m * (t - Q) : 0.0; }, [=](double t) { return t > Q ? 2 * m : 0.0; });
  p.prox = [=](double t, double k) { return t <= Q ? t : (t + 2 * m * Q / k) / (1 + 2 * m / k); };
  G.parts.push_back(p);
  G.Phi = [m](double) { return m; };
  G.mu = m;
  return G;
}

namespace {

constexpr int kAngles = 64;
constexpr int kRadiiPerUnit = 8;

template <class Fn>
void for_each_generator(int k, Fn&& fn) {
  fn(Vec2::Zero());
  for (int j = 1; j <= kRadiiPerUnit * k; ++j) {
    double r = double(j) / kRadiiPerUnit;
    for (int a = 0; a < kAngles; ++a) {
      double th = 2 * std::numbers::pi * a / kAngles;
      fn(Vec2(r * std::cos(th), r * std::sin(th)));
    }
  }
}

}  // namespace

double lipschitz_on_ball(const Lagrangian& F, int j) {
  double m = 0.0;
  for_each_generator(j, [&](const Vec2& y) { m = std::max(m, F.subgradient(y).norm()); });
  return 1.1 * m;
}

std::vector<double> epsilon_schedule(const Lagrangian& F, int k) {
  if (!F.mu) throw Error(ErrorCode::BadParams, "epsilon schedule needs a constant modulus mu");
  const double mup = *F.mu / 36;
  std::vector<double> eps;
  double prev = 0.5;
  for (int j = 1; j <= k; ++j) {
    double L = lipschitz_on_ball(F, j);
    double gap = 1.0 / j - 1.0 / (j + 1);
    double gm = gap / (L + (6.0 * j + 5) * mup / 2), gp = gap / (L + mup * (j + 1));
    prev = std::min({gm, gp, prev});
    eps.push_back(prev);
  }
  return eps;
}

RegularizedLagrangian::RegularizedLagrangian(const Lagrangian& F, int k) : base_(F), k_(k) {
  if (!F.mu) throw Error(ErrorCode::BadParams, "approximation needs a constant modulus mu");
  if (k < 1 || k < 2 * F.R) throw Error(ErrorCode::BadParams, "k must be at least 2R");
  mu_prime_ = *F.mu / 36;
  eps_ = epsilon_schedule(F, k).back();
  L_k_ = lipschitz_on_ball(F, k);
  for_each_generator(k, [&](const Vec2& y) {
    y_.push_back(y);
    zeta_.push_back(F.subgradient(y));
    Fy_.push_back(F.value(y));
    quad_.push_back(y.norm() > 2 * F.R ? 1 : 0);
  });
}

double RegularizedLagrangian::gen_value(size_t g, const Vec2& x) const {
  Vec2 d = x - y_[g];
  return Fy_[g] + zeta_[g].dot(d) + (quad_[g] ? 0.5 * mu_prime_ * d.squaredNorm() : 0.0);
}

Vec2 RegularizedLagrangian::gen_grad(size_t g, const Vec2& x) const {
  return quad_[g] ? Vec2(zeta_[g] + mu_prime_ * (x - y_[g])) : zeta_[g];
}

double RegularizedLagrangian::tilde(const Vec2& x) const {
  double m = -kInf;
  for (size_t g = 0; g < y_.size(); ++g) m = std::max(m, gen_value(g, x));
  return m;
}

std::vector<int> RegularizedLagrangian::survivors(const Vec2& x) const {
  // Generators that cannot win anywhere in B_eps(x) are dropped: the winner at x
  // stays above M - |grad| eps on the ball, the others stay below v + |grad| eps + mu' eps^2 / 2.
  const size_t n = y_.size();
  std::vector<double> v(n), s(n);
  double M = -kInf;
  size_t best = 0;
  for (size_t g = 0; g < n; ++g) {
    v[g] = gen_value(g, x);
    s[g] = gen_grad(g, x).norm();
    if (v[g] > M) {
      M = v[g];
      best = g;
    }
  }
  const double floor = M - s[best] * eps_;
  std::vector<int> keep;
  for (size_t g = 0; g < n; ++g)
    if (v[g] + s[g] * eps_ + (quad_[g] ? 0.5 * mu_prime_ * eps_ * eps_ : 0.0) >= floor) keep.push_back(int(g));
  return keep;
}

double RegularizedLagrangian::value(const Vec2& x) const {
  const auto keep = survivors(x);
  const auto& rule = MollifierRule::get();
  double s = 0.0;
  for (size_t q = 0; q < rule.offsets.size(); ++q) {
    Vec2 z = x - eps_ * rule.offsets[q];
    double m = -kInf;
    for (int g : keep) m = std::max(m, gen_value(size_t(g), z));
    s += rule.weights[q] * m;
  }
  return s - 1.0 / k_;
}

Vec2 RegularizedLagrangian::gradient(const Vec2& x) const {
  const auto keep = survivors(x);
  const auto& rule = MollifierRule::get();
  Vec2 s = Vec2::Zero();
  for (size_t q = 0; q < rule.offsets.size(); ++q) {
    Vec2 z = x - eps_ * rule.offsets[q];
    double m = -kInf;
    int arg = keep.front();
    for (int g : keep) {
      double v = gen_value(size_t(g), z);
      if (v > m) {
        m = v;
        arg = g;
      }
    }
    s += rule.weights[q] * gen_grad(size_t(arg), z);
  }
  return s;
}

double RegularizedLagrangian::hessian_lower_bound(const Vec2& x, double h) const {
  Mat2 H;
  const Vec2 e0(h, 0), e1(0, h);
  double f = value(x);
  H(0, 0) = (value(x + e0) - 2 * f + value(x - e0)) / (h * h);
  H(1, 1) = (value(x + e1) - 2 * f + value(x - e1)) / (h * h);
  H(0, 1) = H(1, 0) = (value(x + e0 + e1) - value(x + e0 - e1) - value(x - e0 + e1) + value(x - e0 - e1)) / (4 * h * h);
  return min_eig(H);
}

}  // namespace bscreg
