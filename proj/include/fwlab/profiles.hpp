#pragma once

// Closed-form asymptotic profiles.
//
// The nonlinear diffusion wave chi_* comes from the Hopf-Cole transform:
// with m = beta M / (2 mu) and
//
//   D(x) = sqrt(pi) + (e^m - 1) int_{x/sqrt(4 mu)}^inf e^{-y^2} dy,
//
// chi_*(x) = -(2 mu / beta) (log D)'(x), so the integrating factor
// eta_*(x) = exp((beta/2mu) int_{-inf}^x chi_*) is simply sqrt(pi) e^m / D(x).
// Everything else (V_*, F_*, Psi_*) is built from these two functions and
// Gaussians, and every time-dependent profile is a self-similar rescaling
// about x = alpha (1 + t).

#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <optional>
#include <vector>

#include "fwlab/errors.hpp"
#include "fwlab/grid.hpp"
#include "fwlab/model.hpp"
#include "fwlab/quadrature.hpp"
#include "fwlab/spectral.hpp"

namespace fwlab {

struct ProfileConstants {
  double mass = 0.0;     // M = int u0
  double kappa = 0.0;    // beta^2 B / (4 b^3 mu^2)
  double d_const = 0.0;  // int eta_*^{-1} chi_*^3
  double theta0 = 0.0;   // int z0
  double theta1 = 0.0;   // int_0^inf int rho
  std::optional<double> theta;        // theta0 + theta1 once known
  std::optional<double> theta_tilde;  // KdV-Burgers counterpart

  double require_theta() const {
    if (!theta) throw ConfigError("profiles: theta not populated (run the theta analysis first)");
    return *theta;
  }
};

inline double compute_kappa(const ModelParams& p) {
  const double b3 = p.small_b * p.small_b * p.small_b;
  return p.beta * p.beta * p.cap_b / (4.0 * b3 * p.mu * p.mu);
}

// ---------------------------------------------------------------------------
// Gaussians

/// Heat kernel G(x, t) = exp(-x^2 / 4 mu t) / sqrt(4 pi mu t).
inline double g_eval(double x, double t, double mu) {
  if (!(t > 0.0)) throw DomainError("g_eval: t must be > 0");
  return std::exp(-x * x / (4.0 * mu * t)) / std::sqrt(4.0 * std::numbers::pi * mu * t);
}

/// Convection-heat kernel G0(x, t) = G(x - alpha t, t), alpha = 2B/b.
inline double g0_eval(double x, double t, const ModelParams& p) {
  if (!(t > 0.0)) throw DomainError("g0_eval: t must be > 0");
  return g_eval(x - derive(p).alpha * t, t, p.mu);
}

/// d/dx G0(x, t).
inline double g0_dx(double x, double t, const ModelParams& p) {
  const double y = x - derive(p).alpha * t;
  return -y / (2.0 * p.mu * t) * g_eval(y, t, p.mu);
}

/// Self-similar coordinate (x - alpha (1+t)) / sqrt(1+t).
inline double similarity_variable(double x, double t, const ModelParams& p) {
  return (x - derive(p).alpha * (1.0 + t)) / std::sqrt(1.0 + t);
}

// ---------------------------------------------------------------------------
// Hopf-Cole wave

namespace detail {

struct HopfCole {
  HopfCole(const ModelParams& p, double mass) : mu(p.mu), beta(p.beta) {
    if (p.beta == 0.0) throw ConfigError("profiles: beta must be nonzero");
    m = p.beta * mass / (2.0 * p.mu);
    em1 = std::expm1(m);
    amp = std::sqrt(p.mu) / p.beta * em1;
    k = em1 / std::sqrt(4.0 * p.mu);
  }
  double gauss(double x) const { return std::exp(-x * x / (4.0 * mu)); }
  double denom(double x) const {
    constexpr double sp = 1.7724538509055160273;  // sqrt(pi)
    return sp + em1 * 0.5 * sp * std::erfc(x / std::sqrt(4.0 * mu));
  }
  // n-th derivative of chi_*, n <= 3. With g = e^{-x^2/4mu}, D' = -k g:
  //   chi   = a g/D
  //   chi'  = a (g'/D + k g^2/D^2)
  //   chi'' = a (g''/D + 3k g g'/D^2 + 2k^2 g^3/D^3)
  //   chi'''= a (g'''/D + k(4 g g'' + 3 g'^2)/D^2 + 12 k^2 g^2 g'/D^3 + 6 k^3 g^4/D^4)
  double chi(double x, int n) const {
    if (em1 == 0.0) return 0.0;
    const double g = gauss(x);
    const double d = denom(x);
    const double g1 = -x / (2.0 * mu) * g;
    const double g2 = (x * x / (4.0 * mu * mu) - 1.0 / (2.0 * mu)) * g;
    const double g3 = (3.0 * x / (4.0 * mu * mu) - x * x * x / (8.0 * mu * mu * mu)) * g;
    switch (n) {
      case 0:
        return amp * g / d;
      case 1:
        return amp * (g1 / d + k * g * g / (d * d));
      case 2:
        return amp * (g2 / d + 3.0 * k * g * g1 / (d * d) + 2.0 * k * k * g * g * g / (d * d * d));
      case 3:
        return amp * (g3 / d + k * (4.0 * g * g2 + 3.0 * g1 * g1) / (d * d) +
                      12.0 * k * k * g * g * g1 / (d * d * d) +
                      6.0 * k * k * k * g * g * g * g / (d * d * d * d));
      default:
        throw ConfigError("chi_star derivative order must be <= 3");
    }
  }
  double eta(double x) const { return 1.7724538509055160273 * std::exp(m) / denom(x); }

  double mu;
  double beta;
  double m = 0.0;
  double em1 = 0.0;
  double amp = 0.0;
  double k = 0.0;
};

}  // namespace detail

/// chi_* and its first three derivatives (order 0..3), analytic.
inline double chi_star_derivative(double x, int order, const ProfileConstants& c,
                                  const ModelParams& p) {
  return detail::HopfCole(p, c.mass).chi(x, order);
}

inline double chi_star(double x, const ProfileConstants& c, const ModelParams& p) {
  return chi_star_derivative(x, 0, c, p);
}

/// chi(x, t) = chi_*((x - alpha(1+t))/sqrt(1+t)) / sqrt(1+t).
inline double chi(double x, double t, const ProfileConstants& c, const ModelParams& p) {
  if (t < 0.0) throw DomainError("chi: t must be >= 0");
  return chi_star(similarity_variable(x, t, p), c, p) / std::sqrt(1.0 + t);
}

/// d^n chi / dx^n at (x, t), n <= 3.
inline double chi_dx(double x, double t, int n, const ProfileConstants& c, const ModelParams& p) {
  const double s = std::sqrt(1.0 + t);
  return chi_star_derivative(similarity_variable(x, t, p), n, c, p) / std::pow(s, n + 1);
}

/// eta_*(x) = exp((beta/2mu) int_{-inf}^x chi_*); 1 at -inf, e^{beta M/2mu} at +inf.
inline double eta_star(double x, const ProfileConstants& c, const ModelParams& p) {
  return detail::HopfCole(p, c.mass).eta(x);
}

inline double eta(double x, double t, const ProfileConstants& c, const ModelParams& p) {
  if (t < 0.0) throw DomainError("eta: t must be >= 0");
  return eta_star(similarity_variable(x, t, p), c, p);
}

/// V_* = (4 pi mu)^{-1/2} d/dx(eta_* e^{-x^2/4mu}), using eta_*' = (beta/2mu) chi_* eta_*.
inline double v_star(double x, const ProfileConstants& c, const ModelParams& p) {
  const detail::HopfCole hc(p, c.mass);
  const double e = hc.eta(x);
  const double de = p.beta / (2.0 * p.mu) * hc.chi(x, 0) * e;
  return (de - x / (2.0 * p.mu) * e) * hc.gauss(x) / std::sqrt(4.0 * std::numbers::pi * p.mu);
}

/// d = int eta_*^{-1} chi_*^3 (adaptive Gauss-Kronrod, Gaussian-tail truncation).
inline double compute_d(const ProfileConstants& c, const ModelParams& p) {
  if (c.mass == 0.0) return 0.0;
  const detail::HopfCole hc(p, c.mass);
  auto f = [&](double x) {
    const double v = hc.chi(x, 0);
    return v * v * v / hc.eta(x);
  };
  return quad::integrate_line(f, 0.0, std::sqrt(p.mu));
}

/// Mass, kappa and d for initial mass M; theta is left unset.
inline ProfileConstants make_profile_constants(const ModelParams& p, double mass) {
  ProfileConstants c;
  c.mass = mass;
  c.kappa = compute_kappa(p);
  c.d_const = compute_d(c, p);
  return c;
}

/// V(x, t) = -kappa d V_*(zeta) (1+t)^{-1} log(1+t).
inline double second_profile_V(double x, double t, const ProfileConstants& c,
                               const ModelParams& p) {
  if (t < 0.0) throw DomainError("second_profile_V: t must be >= 0");
  return -c.kappa * c.d_const * v_star(similarity_variable(x, t, p), c, p) * std::log1p(t) /
         (1.0 + t);
}

/// F_* = (2B/b^3) eta_*^{-1} chi_*'' - kappa d (4 pi mu)^{-1/2} e^{-x^2/4mu}.
inline double f_star(double x, const ProfileConstants& c, const ModelParams& p) {
  const detail::HopfCole hc(p, c.mass);
  const double gamma = derive(p).gamma;
  return gamma * hc.chi(x, 2) / hc.eta(x) -
         c.kappa * c.d_const * hc.gauss(x) / std::sqrt(4.0 * std::numbers::pi * p.mu);
}

/// F_*', with (eta_*^{-1})' = -(beta/2mu) chi_* eta_*^{-1}.
inline double f_star_prime(double x, const ProfileConstants& c, const ModelParams& p) {
  const detail::HopfCole hc(p, c.mass);
  const double gamma = derive(p).gamma;
  const double inv_eta = 1.0 / hc.eta(x);
  const double a = hc.chi(x, 3) - p.beta / (2.0 * p.mu) * hc.chi(x, 0) * hc.chi(x, 2);
  return gamma * a * inv_eta + c.kappa * c.d_const * x / (2.0 * p.mu) * hc.gauss(x) /
                                   std::sqrt(4.0 * std::numbers::pi * p.mu);
}

// ---------------------------------------------------------------------------
// Psi_* = -d/dx( eta_*(x) J(x) ),  J(x) = int_0^1 (G(1-tau) * F(tau))(x) dtau,
// F(x, tau) = F_*(x/sqrt(tau)) tau^{-3/2}.
//
// With this sign Psi is the leading part of v - V, where v solves
// v_t + alpha v_x + (beta chi v)_x - mu v_xx = -(2B/b^3) chi_xxx, v(0) = 0.
//
// The tau integral is split at 1/2. On (0, 1/2] put tau = sigma^2 and y =
// sigma s, which turns the integrand into
//   (2/sigma) int [G(x - sigma s, 1 - sigma^2) - G(x, 1 - sigma^2)] F_*(s) ds,
// smooth at sigma = 0 because int F_* = 0 (subtracting the discrete mean makes
// that exact on the s lattice). On [1/2, 1) put 1 - tau = varsigma^2 and
// y = x - varsigma r, giving
//   2 varsigma tau^{-3/2} int G(r, 1) F_*((x - varsigma r)/sqrt(tau)) dr.
// Both outer integrals use Gauss-Legendre; the inner ones use the trapezoid
// rule, which is spectrally accurate for these Gaussian-tailed integrands.

struct PsiQuadrature {
  std::size_t outer_nodes = 32;  // Gauss-Legendre nodes per half of the tau range
  double inner_step = 0.05;      // trapezoid step in units of sqrt(mu)
};

class PsiStarQuadrature {
 public:
  struct Inner {
    double j = 0.0;   // J(x)
    double dj = 0.0;  // J'(x)
  };

  PsiStarQuadrature(const ModelParams& p, const ProfileConstants& c, PsiQuadrature q = {})
      : p_(p), c_(c), hc_(p, c.mass) {
    const double smu = std::sqrt(p.mu);
    const double h = q.inner_step * smu;
    const double rf = quad::tail_radius([&](double s) { return f_star(s, c, p); }, 0.0, 0.05 * smu,
                                        200.0 * smu);
    for (double s = -rf; s <= rf + 0.5 * h; s += h) {
      s_.push_back(s);
      fs_.push_back(f_star(s, c, p) * h);
    }
    for (double v : fs_) fs_sum_ += v;
    const double rg = 6.5 * std::sqrt(4.0 * p.mu);
    for (double r = -rg; r <= rg + 0.5 * h; r += h) {
      r_.push_back(r);
      gr_.push_back(g_eval(r, 1.0, p.mu) * h);
    }
    outer_ = quad::gauss_legendre(q.outer_nodes, 0.0, std::sqrt(0.5));
  }

  Inner inner(double x) const {
    Inner out;
    const double mu = p_.mu;
    for (std::size_t i = 0; i < outer_.nodes.size(); ++i) {
      const double sg = outer_.nodes[i];
      const double w = outer_.weights[i];
      // Lower half, tau = sigma^2.
      {
        const double tt = 1.0 - sg * sg;
        double a = 0.0;
        double da = 0.0;
        for (std::size_t j = 0; j < s_.size(); ++j) {
          const double y = x - sg * s_[j];
          const double gv = g_eval(y, tt, mu);
          a += gv * fs_[j];
          da += -y / (2.0 * mu * tt) * gv * fs_[j];
        }
        const double g0 = g_eval(x, tt, mu);
        a -= g0 * fs_sum_;
        da -= -x / (2.0 * mu * tt) * g0 * fs_sum_;
        out.j += w * 2.0 / sg * a;
        out.dj += w * 2.0 / sg * da;
      }
      // Upper half, tau = 1 - varsigma^2.
      {
        const double vs = sg;
        const double tau = 1.0 - vs * vs;
        const double st = std::sqrt(tau);
        double b = 0.0;
        double db = 0.0;
        for (std::size_t j = 0; j < r_.size(); ++j) {
          const double arg = (x - vs * r_[j]) / st;
          b += gr_[j] * f_star(arg, c_, p_);
          db += gr_[j] * f_star_prime(arg, c_, p_);
        }
        out.j += w * 2.0 * vs * b / (tau * st);
        out.dj += w * 2.0 * vs * db / (tau * tau);
      }
    }
    return out;
  }

  /// Psi_*(x) = -(eta_*'(x) J(x) + eta_*(x) J'(x)).
  double operator()(double x) const {
    const Inner in = inner(x);
    const double e = hc_.eta(x);
    const double de = p_.beta / (2.0 * p_.mu) * hc_.chi(x, 0) * e;
    return -(de * in.j + e * in.dj);
  }

 private:
  ModelParams p_;
  ProfileConstants c_;
  detail::HopfCole hc_;
  std::vector<double> s_, fs_, r_, gr_;
  double fs_sum_ = 0.0;
  quad::Rule outer_;
};

/// Direct (slow) evaluation of Psi_* at one point.
inline double psi_star(double x, const ProfileConstants& c, const ModelParams& p,
                       PsiQuadrature q = {}) {
  return PsiStarQuadrature(p, c, q)(x);
}

/// Psi_* tabulated once at Chebyshev points on [-R, R] with R = 16 sqrt(mu);
/// outside that range Psi_* is below 1e-25 of its peak and is returned as 0.
class PsiStarTable {
 public:
  PsiStarTable(const ModelParams& p, const ProfileConstants& c, PsiQuadrature q = {},
               std::size_t nodes = 256)
      : cheb_(-16.0 * std::sqrt(p.mu), 16.0 * std::sqrt(p.mu), nodes) {
    if (c.mass == 0.0) return;  // F_* == 0, table stays zero
    const PsiStarQuadrature direct(p, c, q);
    auto xs = cheb_.nodes();
    auto ys = cheb_.values();
    for (std::size_t j = 0; j < xs.size(); ++j) ys[j] = direct(xs[j]);
  }
  double operator()(double x) const { return cheb_(x); }
  double radius() const { return cheb_.upper(); }

 private:
  quad::Chebyshev cheb_;
};

// ---------------------------------------------------------------------------
// Third profile

/// Bundles parameters, constants and the Psi_* table for repeated sampling.
class ThirdProfile {
 public:
  ThirdProfile(const ModelParams& p, const ProfileConstants& c, PsiQuadrature q = {})
      : p_(p), c_(c), psi_(std::make_shared<PsiStarTable>(p, c, q)) {}

  const ModelParams& params() const { return p_; }
  const ProfileConstants& constants() const { return c_; }
  void set_theta(double theta) { c_.theta = theta; }

  double psi_star(double x) const { return (*psi_)(x); }

  /// Psi(x, t) = Psi_*(zeta) / (1+t).
  double psi(double x, double t) const {
    if (t < 0.0) throw DomainError("third_profile_Psi: t must be >= 0");
    return (*psi_)(similarity_variable(x, t, p_)) / (1.0 + t);
  }
  /// W(x, t) = theta V_*(zeta) / (1+t).
  double w(double x, double t) const {
    if (t < 0.0) throw DomainError("third_profile_W: t must be >= 0");
    return c_.require_theta() * v_star(similarity_variable(x, t, p_), c_, p_) / (1.0 + t);
  }
  double q(double x, double t) const { return w(x, t) + psi(x, t); }

 private:
  ModelParams p_;
  ProfileConstants c_;
  std::shared_ptr<const PsiStarTable> psi_;
};

inline double third_profile_Psi(double x, double t, const ThirdProfile& tp) { return tp.psi(x, t); }
inline double third_profile_W(double x, double t, const ThirdProfile& tp) { return tp.w(x, t); }
inline double third_profile_Q(double x, double t, const ThirdProfile& tp) { return tp.q(x, t); }

// ---------------------------------------------------------------------------
// Auxiliary operator
//
// U[h](x,t,tau) = int d_x(G0(x-y, t-tau) eta(x,t)) eta(y,tau)^{-1} H(y) dy,
// H(y) = int_{-inf}^y h. H is the spectral antiderivative of h minus its mass
// carried by a unit Gaussian, plus that mass times the Gaussian's error
// function primitive. The y-integral is a trapezoid sum on the grid of h
// (O(N^2)); the outer d/dx is taken analytically through the product rule,
// with eta_x = (beta/2mu) chi eta.

inline Field u_operator(const Field& h, double t, double tau, const ProfileConstants& c,
                        const ModelParams& p) {
  if (!(tau >= 0.0 && tau < t)) throw DomainError("u_operator: requires 0 <= tau < t");
  const auto& g = h.grid();
  const std::size_t n = g.size();
  const double dx = g.spacing();
  const double dt = t - tau;

  const double mass = h.integral();
  Field zero_mean = h;
  for (std::size_t j = 0; j < n; ++j)
    zero_mean[j] -= mass * std::exp(-g.x(j) * g.x(j)) / std::sqrt(std::numbers::pi);
  const Field cum = antiderivative_zero_mean(zero_mean);

  std::vector<double> weight(n);  // eta(y,tau)^{-1} H(y) dy
  for (std::size_t j = 0; j < n; ++j) {
    const double big_h = cum[j] + mass * 0.5 * std::erfc(-g.x(j));
    weight[j] = big_h / eta(g.x(j), tau, c, p) * dx;
  }

  Field out(g);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = g.x(i);
    double conv = 0.0;
    double dconv = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (weight[j] == 0.0) continue;
      const double y = x - g.x(j);
      conv += g0_eval(y, dt, p) * weight[j];
      dconv += g0_dx(y, dt, p) * weight[j];
    }
    const double e = eta(x, t, c, p);
    const double de = p.beta / (2.0 * p.mu) * chi(x, t, c, p) * e;
    out[i] = de * conv + e * dconv;
  }
  return out;
}

}  // namespace fwlab
