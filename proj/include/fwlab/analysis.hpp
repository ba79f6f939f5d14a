#pragma once

// Derived fields, norm series, the constants theta0/theta1/theta_tilde,
// kernel gaps, and log-corrected power-law fits.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "fwlab/errors.hpp"
#include "fwlab/grid.hpp"
#include "fwlab/model.hpp"
#include "fwlab/profiles.hpp"
#include "fwlab/solver.hpp"
#include "fwlab/spectral.hpp"

namespace fwlab {

inline constexpr double kInfNorm = std::numeric_limits<double>::infinity();

/// ||d^l f / dx^l||_{L^p}: spectral derivative, then the rectangle rule.
inline double lp_norm(const Field& f, double p, int l = 0) {
  if (!(p >= 1.0)) throw ConfigError("lp_norm: p must be in [1, inf]");
  const Field d = l == 0 ? f : derivative(f, l);
  if (std::isinf(p)) return d.max_abs();
  const double h = d.grid().spacing();
  double s = 0.0;
  if (p == 1.0) {
    for (double v : d.values()) s += std::abs(v);
    return s * h;
  }
  if (p == 2.0) {
    for (double v : d.values()) s += v * v;
    return std::sqrt(s * h);
  }
  for (double v : d.values()) s += std::pow(std::abs(v), p);
  return std::pow(s * h, 1.0 / p);
}

/// int |f| (1 + |x|)^k.
inline double weighted_l1_norm(const Field& f, double k) {
  if (!(k >= 0.0)) throw ConfigError("weighted_l1_norm: k must be >= 0");
  const auto& g = f.grid();
  double s = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j)
    s += std::abs(f[j]) * std::pow(1.0 + std::abs(g.x(j)), k);
  return s * g.spacing();
}

// ---------------------------------------------------------------------------
// Norm series and fits

struct NormSeries {
  std::vector<double> times;
  std::vector<double> values;
  double p = 2.0;
  int l = 0;
  std::string label;

  void push(double t, double v) {
    times.push_back(t);
    values.push_back(v);
  }
  /// Value at the stored time closest to t.
  double at(double t) const {
    if (times.empty()) throw ConfigError("norm series '" + label + "' is empty");
    std::size_t best = 0;
    for (std::size_t i = 1; i < times.size(); ++i)
      if (std::abs(times[i] - t) < std::abs(times[best] - t)) best = i;
    return values[best];
  }
};

struct FitWindow {
  double t_min = 0.0;
  double t_max = kInfNorm;
};

struct DecayFit {
  double exponent = 0.0;  // p in C t^p (log t)^q
  int log_power = 0;      // q
  double prefactor = 0.0;
  double rms_residual = 0.0;
  FitWindow window;
  std::size_t points = 0;
};

/// The last decade of the series: [t_last / 10, t_last].
inline FitWindow last_decade(const NormSeries& s) {
  if (s.times.empty()) throw ConfigError("decay_fit: empty series");
  const double t = s.times.back();
  return {t / 10.0, t};
}

/// Least squares of log v - q log log t = log C + p log t over the window.
inline DecayFit decay_fit(const NormSeries& s, int log_power, std::optional<FitWindow> window = {}) {
  if (log_power != 0 && log_power != 1) throw ConfigError("decay_fit: log power must be 0 or 1");
  const FitWindow w = window ? *window : last_decade(s);
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < s.times.size(); ++i) {
    const double t = s.times[i];
    if (t < w.t_min * (1.0 - 1e-12) || t > w.t_max * (1.0 + 1e-12)) continue;
    if (!(s.values[i] > 0.0))
      throw DomainError("decay_fit: nonpositive value " + std::to_string(s.values[i]) + " at t = " +
                        std::to_string(t));
    if (log_power == 1 && !(t > 1.0)) throw DomainError("decay_fit: q = 1 needs t > 1");
    xs.push_back(std::log(t));
    ys.push_back(log_power == 1 ? std::log(s.values[i]) - std::log(std::log(t)) : std::log(s.values[i]));
  }
  const std::size_t n = xs.size();
  if (n < 5) throw ConfigError("decay_fit: fewer than 5 points in window");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw ConfigError("decay_fit: window spans a single time");
  DecayFit f;
  f.exponent = sxy / sxx;
  const double icpt = my - f.exponent * mx;
  f.prefactor = std::exp(icpt);
  f.log_power = log_power;
  f.window = w;
  f.points = n;
  double r2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ys[i] - icpt - f.exponent * xs[i];
    r2 += r * r;
  }
  f.rms_residual = std::sqrt(r2 / n);
  return f;
}

// ---------------------------------------------------------------------------
// Profile sampling on a trajectory

/// Samples fn(x_lab, t) on the snapshot grid, honoring the frame shift.
inline Field sample_at(const Trajectory& traj, std::size_t i,
                       const std::function<double(double, double)>& fn) {
  if (i >= traj.size()) throw ConfigError("trajectory: snapshot index out of range");
  const double t = traj.times[i];
  const double shift = traj.frame_shift_at_t(t);
  return Field::sample(traj.grid, [&](double z) { return fn(z + shift, t); });
}

/// psi = u - chi.
inline Field psi_field(const Trajectory& traj, std::size_t i, const ProfileConstants& c,
                       const ModelParams& p) {
  Field chi_f = sample_at(traj, i, [&](double x, double t) { return chi(x, t, c, p); });
  return traj.snapshots.at(i) - chi_f;
}

/// Order 1: u - chi; order 2: u - chi - V; order 3: u - chi - V - Q.
inline Field residual_field(const Trajectory& traj, std::size_t i, const ThirdProfile& prof,
                            int order) {
  if (order < 1 || order > 3) throw ConfigError("residual_field: order must be 1, 2 or 3");
  const auto& c = prof.constants();
  const auto& p = prof.params();
  if (order == 3 && !c.theta) throw ConfigError("residual_field: order 3 needs theta");
  return traj.snapshots.at(i) - sample_at(traj, i, [&](double x, double t) {
           double v = chi(x, t, c, p);
           if (order >= 2) v += second_profile_V(x, t, c, p);
           if (order == 3) v += prof.q(x, t);
           return v;
         });
}

/// w = u - chi - v with v replaced by its asymptotic form V + Psi.
inline Field w_field(const Trajectory& traj, std::size_t i, const ThirdProfile& prof) {
  const auto& c = prof.constants();
  const auto& p = prof.params();
  return traj.snapshots.at(i) - sample_at(traj, i, [&](double x, double t) {
           return chi(x, t, c, p) + second_profile_V(x, t, c, p) + prof.psi(x, t);
         });
}

/// Norm of fn(i) over every snapshot.
inline NormSeries norm_series(const Trajectory& traj, const std::function<Field(std::size_t)>& fn,
                              double p, int l, std::string label, double t_min = 0.0) {
  NormSeries s;
  s.p = p;
  s.l = l;
  s.label = std::move(label);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    if (traj.times[i] < t_min) continue;
    s.push(traj.times[i], lp_norm(fn(i), p, l));
  }
  return s;
}

inline NormSeries residual_series(const Trajectory& traj, const ThirdProfile& prof, int order,
                                  double p, int l = 0, double t_min = 0.0) {
  static const char* labels[] = {"", "u-chi", "u-chi-V", "u-chi-V-Q"};
  if (order < 1 || order > 3) throw ConfigError("residual_series: order must be 1, 2 or 3");
  return norm_series(
      traj, [&](std::size_t i) { return residual_field(traj, i, prof, order); }, p, l,
      labels[order], t_min);
}

// ---------------------------------------------------------------------------
// theta

/// z0 = eta(.,0)^{-1} int_{-inf}^x (u0 - chi(.,0)); u0 given in lab coordinates.
inline Field z0_field(const Field& u0, const ProfileConstants& c, const ModelParams& p,
                      double tol = 1e-8) {
  Field d = u0 - Field::sample(u0.grid(), [&](double x) { return chi(x, 0.0, c, p); });
  const double defect = d.integral();
  if (std::abs(defect) > tol)
    throw ConsistencyError("z0_field: int(u0 - chi(.,0)) = " + std::to_string(defect) +
                           " (mass of u0 differs from M)");
  Field z = antiderivative_zero_mean(d);
  const auto& g = u0.grid();
  for (std::size_t j = 0; j < g.size(); ++j) z[j] /= eta(g.x(j), 0.0, c, p);
  return z;
}

inline double theta0(const Field& u0, const ProfileConstants& c, const ModelParams& p) {
  return z0_field(u0, c, p).integral();
}

enum class RhoForm { Standard, IntegratedByParts };

/// rho = -eta^{-1}((beta/2) psi^2 + (2B/b) R d^2 psi + (2B/b^3) R d^4 chi),
/// R = (b^2 - d^2)^{-1}. The integrated-by-parts form replaces the middle term
/// by (beta B / (b mu)) chi R d psi; both have the same integral.
inline Field rho_field(const Trajectory& traj, std::size_t i, const ProfileConstants& c,
                       const ModelParams& p, RhoForm form = RhoForm::Standard) {
  const Field chi_f = sample_at(traj, i, [&](double x, double t) { return chi(x, t, c, p); });
  const Field eta_f = sample_at(traj, i, [&](double x, double t) { return eta(x, t, c, p); });
  const Field psi = traj.snapshots.at(i) - chi_f;
  const double b2 = p.small_b * p.small_b;
  const Field r4chi =
      apply_multiplier(chi_f, [&](double xi) { return cplx(xi * xi * xi * xi / (b2 + xi * xi)); });
  Field mid(traj.grid);
  if (form == RhoForm::Standard) {
    mid = apply_multiplier(psi, [&](double xi) { return cplx(-xi * xi / (b2 + xi * xi)); });
    mid *= 2.0 * p.cap_b / p.small_b;
  } else {
    mid = apply_multiplier(psi, [&](double xi) { return cplx(0.0, xi) / (b2 + xi * xi); });
    const double k = p.beta * p.cap_b / (p.small_b * p.mu);
    for (std::size_t j = 0; j < mid.size(); ++j) mid[j] *= k * chi_f[j];
  }
  const double gamma = derive(p).gamma;
  Field out(traj.grid);
  for (std::size_t j = 0; j < out.size(); ++j)
    out[j] = -(0.5 * p.beta * psi[j] * psi[j] + mid[j] + gamma * r4chi[j]) / eta_f[j];
  return out;
}

/// rho_tilde = -eta^{-1}((beta/2) psi~^2 + (2B/b^3) d^2 psi~) on a KdV-Burgers snapshot.
inline Field rho_tilde_field(const Trajectory& traj, std::size_t i, const ProfileConstants& c,
                             const ModelParams& p) {
  const Field psi = psi_field(traj, i, c, p);
  const Field eta_f = sample_at(traj, i, [&](double x, double t) { return eta(x, t, c, p); });
  const Field d2 = derivative(psi, 2);
  const double gamma = derive(p).gamma;
  Field out(traj.grid);
  for (std::size_t j = 0; j < out.size(); ++j)
    out[j] = -(0.5 * p.beta * psi[j] * psi[j] + gamma * d2[j]) / eta_f[j];
  return out;
}

struct ThetaEstimate {
  double value = 0.0;
  double uncertainty = 0.0;
  double tail_slope = 0.0;  // s in |int rho dx| ~ A t^s on the last decade
  double tail_amplitude = 0.0;
};

/// int_0^inf I(t) dt from samples: trapezoid up to the last time; the tail
/// beyond it is estimated from a fit A t^s of |I| on the last decade and
/// reported as uncertainty A t_end^{s+1} / |s+1|, not added to the value.
inline ThetaEstimate theta_from_integrand(const std::vector<double>& times,
                                          const std::vector<double>& integrand) {
  if (times.size() != integrand.size()) throw ConfigError("theta: size mismatch");
  if (times.empty() || times.front() != 0.0)
    throw ConfigError("theta: the trajectory must start with a snapshot at t = 0");
  ThetaEstimate est;
  for (std::size_t i = 1; i < times.size(); ++i)
    est.value += 0.5 * (times[i] - times[i - 1]) * (integrand[i] + integrand[i - 1]);

  NormSeries tail;
  for (std::size_t i = 0; i < times.size(); ++i)
    if (times[i] > 0.0 && integrand[i] != 0.0) tail.push(times[i], std::abs(integrand[i]));
  const bool all_zero =
      std::all_of(integrand.begin(), integrand.end(), [](double v) { return v == 0.0; });
  if (all_zero) return est;
  const double t_end = times.back();
  const DecayFit fit = decay_fit(tail, 0, FitWindow{t_end / 10.0, t_end});
  est.tail_slope = fit.exponent;
  est.tail_amplitude = fit.prefactor;
  if (!(fit.exponent < -1.0))
    throw NonIntegrableTailError(
        "theta: tail slope " + std::to_string(fit.exponent) + " >= -1, integral not converged",
        fit.exponent);
  est.uncertainty = fit.prefactor * std::pow(t_end, fit.exponent + 1.0) /
                    std::abs(fit.exponent + 1.0);
  return est;
}

inline std::vector<double> rho_integrals(const Trajectory& traj, const ProfileConstants& c,
                                         const ModelParams& p, RhoForm form = RhoForm::Standard) {
  std::vector<double> out;
  for (std::size_t i = 0; i < traj.size(); ++i) out.push_back(rho_field(traj, i, c, p, form).integral());
  return out;
}

/// theta1 = int_0^inf int rho dx dt.
inline ThetaEstimate theta1(const Trajectory& traj, const ProfileConstants& c,
                            const ModelParams& p) {
  return theta_from_integrand(traj.times, rho_integrals(traj, c, p));
}

/// theta = theta0 + theta1, theta0 from the t = 0 snapshot.
inline ThetaEstimate theta(const Trajectory& traj, const ProfileConstants& c, const ModelParams& p) {
  if (traj.times.empty() || traj.times.front() != 0.0)
    throw ConfigError("theta: the trajectory must start with a snapshot at t = 0");
  ThetaEstimate est = theta1(traj, c, p);
  est.value += theta0(traj.snapshots.front(), c, p);
  return est;
}

/// theta_tilde = theta0 + int_0^inf int rho_tilde dx dt on a KdV-Burgers run.
inline ThetaEstimate theta_tilde(const Trajectory& traj_kdvb, const ProfileConstants& c,
                                 const ModelParams& p) {
  if (traj_kdvb.times.empty() || traj_kdvb.times.front() != 0.0)
    throw ConfigError("theta_tilde: the trajectory must start with a snapshot at t = 0");
  std::vector<double> ints;
  for (std::size_t i = 0; i < traj_kdvb.size(); ++i)
    ints.push_back(rho_tilde_field(traj_kdvb, i, c, p).integral());
  ThetaEstimate est = theta_from_integrand(traj_kdvb.times, ints);
  est.value += theta0(traj_kdvb.snapshots.front(), c, p);
  return est;
}

// ---------------------------------------------------------------------------
// Kernel gap and projections

/// ||d^l (T(.,t) - G0(.,t))||_{L^p}, evaluated in the co-moving frame where
/// G0 is the centered heat kernel.
inline NormSeries kernel_gap_series(const ModelParams& p, const Grid& g,
                                    const std::vector<double>& times, int l, double norm_p) {
  NormSeries s;
  s.p = norm_p;
  s.l = l;
  s.label = "T-G0";
  for (double t : times) {
    if (!(t > 0.0)) throw DomainError("kernel_gap_series: times must be > 0");
    Field gap = green_function_field(p, g, t, true);
    gap -= Field::sample(g, [&](double z) { return g_eval(z, t, p.mu); });
    s.push(t, lp_norm(gap, norm_p, l));
  }
  return s;
}

/// Least-squares amplitude a minimizing ||f - a basis||_{L^2}.
inline double project_amplitude(const Field& f, const Field& basis) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) {
    num += f[j] * basis[j];
    den += basis[j] * basis[j];
  }
  if (!(den > 0.0)) throw DomainError("project_amplitude: zero basis");
  return num / den;
}

/// theta_hat from snapshot i: (u - chi - V - Psi)(1+t) projected on V_*(zeta).
inline double theta_hat(const Trajectory& traj, std::size_t i, const ThirdProfile& prof) {
  const auto& c = prof.constants();
  const auto& p = prof.params();
  Field w = w_field(traj, i, prof);
  w *= 1.0 + traj.times.at(i);
  const Field basis = sample_at(
      traj, i, [&](double x, double t) { return v_star(similarity_variable(x, t, p), c, p); });
  return project_amplitude(w, basis);
}

}  // namespace fwlab
