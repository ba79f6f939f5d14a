#pragma once

// The named oracle checks run by `fwlab verify` and by the test suite.

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "fwlab/analysis.hpp"
#include "fwlab/grid.hpp"
#include "fwlab/model.hpp"
#include "fwlab/oracle.hpp"
#include "fwlab/profiles.hpp"
#include "fwlab/solver.hpp"
#include "fwlab/spectral.hpp"

namespace fwlab::oracle {

struct VerifyOptions {
  ModelParams params;
  double mass = 0.1;
  bool flip_resolvent_sign = false;  // negative control
};

struct NamedCheck {
  std::string name;
  std::function<OracleReport(const VerifyOptions&)> run;
};

namespace checks {

inline OracleReport resolvent(const VerifyOptions& o) {
  const auto& p = o.params;
  const Grid g(64.0, 2048);
  const Field f = Field::sample(g, [](double x) { return std::exp(-x * x); });
  const double sign = o.flip_resolvent_sign ? -1.0 : 1.0;
  const Field spec = apply_multiplier(f, [&](double xi) {
    return cplx(sign * helmholtz_multiplier(p, xi, 0).real());
  });
  const double b = p.small_b;
  const Field direct =
      convolve_direct(f, [b](double s) { return std::exp(-b * std::abs(s)) / (2.0 * b); }, 60.0);
  return make_report("resolvent_vs_direct_convolution", max_abs_diff(spec, direct), 1e-8);
}

inline OracleReport second_derivative(const VerifyOptions&) {
  const Grid g(16.0, 4096);
  const Field f = Field::sample(g, [](double x) { return std::exp(-x * x); });
  return make_report("spectral_d2_vs_finite_difference",
                     max_abs_diff(derivative(f, 2), finite_difference(f, 2)), 1e-4);
}

inline OracleReport propagator(const VerifyOptions& o) {
  const auto& p = o.params;
  const Grid g(40.0, 512);
  const Field u0 = Field::sample(g, [](double x) { return std::exp(-x * x); });
  const double t = 1.0;
  const Field prop = from_spectrum(linear_propagator(p, EquationKind::viscous_fw(), to_spectrum(u0), t));
  // (1/pi) int_0^inf e^{-mu xi^2 t} sqrt(pi) e^{-xi^2/4} cos(xi x - omega t) dxi
  double diff = 0.0;
  for (std::size_t j = 0; j < g.size(); j += 8) {
    const double x = g.x(j);
    auto integrand = [&](double xi) {
      return std::exp(-(p.mu * t + 0.25) * xi * xi) * std::sqrt(std::numbers::pi) *
             std::cos(xi * x - dispersion_symbol(p, xi) * t) / std::numbers::pi;
    };
    const double ref = quad_reference(integrand, 0.0, 14.0, 1e-12);
    diff = std::max(diff, std::abs(ref - prop[j]));
  }
  return make_report("propagator_vs_fourier_integral", diff, 1e-8);
}

inline OracleReport d_constant(const VerifyOptions& o) {
  const auto c = make_profile_constants(o.params, o.mass);
  const auto& p = o.params;
  const double ref = quad_reference_line(
      [&](double x) {
        const double v = chi_star(x, c, p);
        return v * v * v / eta_star(x, c, p);
      },
      0.0, std::sqrt(p.mu), 1e-16);
  return make_report("compute_d_vs_adaptive_simpson", std::abs(ref - c.d_const), 1e-10);
}

inline OracleReport chi_mass(const VerifyOptions& o) {
  const auto c = make_profile_constants(o.params, o.mass);
  const double ref =
      quad_reference_line([&](double x) { return chi_star(x, c, o.params); }, 0.0, 1.0, 1e-13);
  return make_report("chi_star_mass", std::abs(ref - o.mass), 1e-10);
}

inline OracleReport f_star_zero_mean(const VerifyOptions& o) {
  const auto c = make_profile_constants(o.params, o.mass);
  const double ref =
      quad_reference_line([&](double x) { return f_star(x, c, o.params); }, 0.0, 1.0, 1e-13);
  return make_report("f_star_zero_mean", std::abs(ref), 1e-8);
}

inline OracleReport v_star_zero_mean(const VerifyOptions& o) {
  const auto c = make_profile_constants(o.params, o.mass);
  const double ref =
      quad_reference_line([&](double x) { return v_star(x, c, o.params); }, 0.0, 1.0, 1e-13);
  return make_report("v_star_zero_mean", std::abs(ref), 1e-10);
}

inline OracleReport chi_second_derivative(const VerifyOptions& o) {
  const auto c = make_profile_constants(o.params, o.mass);
  const Grid g(32.0, 1024);
  const Field f = Field::sample(g, [&](double x) { return chi_star(x, c, o.params); });
  const Field exact =
      Field::sample(g, [&](double x) { return chi_star_derivative(x, 2, c, o.params); });
  return make_report("chi_star_d2_analytic_vs_spectral", max_abs_diff(derivative(f, 2), exact),
                     1e-8);
}

inline OracleReport u_operator_heat(const VerifyOptions& o) {
  auto p = o.params;
  ProfileConstants c;  // M = 0, eta == 1
  const Grid g(40.0, 512);
  const Field h = Field::sample(g, [](double x) { return (1.0 - 2.0 * x * x) * std::exp(-x * x); });
  const double t = 2.0, tau = 0.5;
  const Field u = u_operator(h, t, tau, c, p);
  // G0(t - tau) * h is the exact convection-heat evolution of h.
  const double s = t - tau;
  const double alpha = derive(p).alpha;
  double diff = 0.0;
  for (std::size_t j = 0; j < g.size(); j += 8) {
    const double x = g.x(j);
    const double ref = quad_reference(
        [&](double y) { return g_eval(x - y - alpha * s, s, p.mu) * (1.0 - 2.0 * y * y) * std::exp(-y * y); },
        -12.0, 12.0, 1e-13);
    diff = std::max(diff, std::abs(ref - u[j]));
  }
  return make_report("u_operator_vs_heat_convolution", diff, 1e-8);
}

inline OracleReport chi_burgers_residual(const VerifyOptions& o) {
  const auto& p = o.params;
  const auto c = make_profile_constants(p, o.mass);
  const Grid g(48.0, 1024);
  const double t = 2.0, dt = 1e-2;
  std::vector<Field> snaps;
  for (int k = -2; k <= 2; ++k)
    snaps.push_back(Field::sample(g, [&](double x) { return chi(x, t + k * dt, c, p); }));
  const Field chi_t = time_derivative(snaps, dt, 1);
  const Field& u = snaps[2];
  Field flux(g);
  const double alpha = derive(p).alpha;
  for (std::size_t j = 0; j < g.size(); ++j) flux[j] = alpha * u[j] + 0.5 * p.beta * u[j] * u[j];
  const Field fx = derivative(flux, 1);
  const Field uxx = derivative(u, 2);
  double res = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j)
    res = std::max(res, std::abs(chi_t[j] + fx[j] - p.mu * uxx[j]));
  return make_report("chi_solves_burgers", res, 1e-6);
}

}  // namespace checks

inline std::vector<NamedCheck> default_checks() {
  return {
      {"resolvent_vs_direct_convolution", checks::resolvent},
      {"spectral_d2_vs_finite_difference", checks::second_derivative},
      {"propagator_vs_fourier_integral", checks::propagator},
      {"compute_d_vs_adaptive_simpson", checks::d_constant},
      {"chi_star_mass", checks::chi_mass},
      {"f_star_zero_mean", checks::f_star_zero_mean},
      {"v_star_zero_mean", checks::v_star_zero_mean},
      {"chi_star_d2_analytic_vs_spectral", checks::chi_second_derivative},
      {"u_operator_vs_heat_convolution", checks::u_operator_heat},
      {"chi_solves_burgers", checks::chi_burgers_residual},
  };
}

/// Runs the checks whose names appear in `only` (all of them when `only` is
/// empty and `none` is false). Exceptions become failed reports.
inline std::vector<OracleReport> run_checks(const VerifyOptions& opt,
                                            const std::vector<std::string>& only = {},
                                            bool none = false) {
  std::vector<OracleReport> out;
  if (none) return out;
  const auto all = default_checks();
  for (const auto& name : only) {
    bool found = false;
    for (const auto& c : all) found = found || c.name == name;
    if (!found) throw ConfigError("verify: unknown check '" + name + "'");
  }
  for (const auto& c : all) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.name) == only.end()) continue;
    try {
      out.push_back(c.run(opt));
    } catch (const std::exception& e) {
      out.push_back({c.name, INFINITY, 0.0, false});
    }
  }
  return out;
}

}  // namespace fwlab::oracle
