#pragma once

// Physical parameters of the viscous Fornberg-Whitham equation
//
//   u_t + beta u u_x + int B e^{-b|x-y|} u_y(y,t) dy = mu u_xx
//
// and the Fourier symbols of its linear/nonlocal parts. Symbols use the
// convention d/dx -> i xi, so the linear part of the equation advances a
// mode as exp(-mu xi^2 t - i phase(xi) t).

#include <cmath>
#include <complex>
#include <string>

#include "fwlab/errors.hpp"

namespace fwlab {

struct ModelParams {
  double beta = 1.0;     // nonlinear coefficient
  double cap_b = 1.0;    // dispersion amplitude B
  double small_b = 1.0;  // dispersion width b
  double mu = 1.0;       // viscosity

  /// Checks beta != 0, B > 0, b > 0, mu > 0. Baseline runs (heat equation,
  /// B -> 0 limits) pass `allow_degenerate` to accept beta == 0 and B == 0.
  void validate(bool allow_degenerate = false) const {
    if (!(small_b > 0.0)) throw ConfigError("model: b must be > 0");
    if (!(mu > 0.0)) throw ConfigError("model: mu must be > 0 (inviscid case unsupported)");
    if (allow_degenerate) {
      if (!(cap_b >= 0.0)) throw ConfigError("model: B must be >= 0");
      if (!std::isfinite(beta)) throw ConfigError("model: beta must be finite");
      return;
    }
    if (!(cap_b > 0.0)) throw ConfigError("model: B must be > 0");
    if (beta == 0.0 || !std::isfinite(beta)) throw ConfigError("model: beta must be nonzero");
  }
};

struct DerivedParams {
  double alpha;  // drift speed 2B/b
  double gamma;  // matched third-order dispersion 2B/b^3
};

inline DerivedParams derive(const ModelParams& p) {
  const double alpha = 2.0 * p.cap_b / p.small_b;
  return {alpha, alpha / (p.small_b * p.small_b)};
}

/// omega(xi) = 2 B b xi / (b^2 + xi^2); odd, |omega| <= B with equality at xi = +-b.
inline double dispersion_symbol(const ModelParams& p, double xi) {
  return 2.0 * p.cap_b * p.small_b * xi / (p.small_b * p.small_b + xi * xi);
}

/// (i xi)^l / (b^2 + xi^2): the symbol of (b^2 - d_x^2)^{-1} d_x^l.
inline std::complex<double> helmholtz_multiplier(const ModelParams& p, double xi, int l) {
  if (l < 0) throw ConfigError("helmholtz_multiplier: l must be >= 0");
  std::complex<double> num(1.0, 0.0);
  const std::complex<double> ixi(0.0, xi);
  for (int k = 0; k < l; ++k) num *= ixi;
  return num / (p.small_b * p.small_b + xi * xi);
}

/// alpha xi - gamma xi^3: phase of the matched KdV-Burgers twin
/// u_t + alpha u_x + gamma u_xxx = mu u_xx.
inline double kdvb_symbol(const ModelParams& p, double xi) {
  const auto d = derive(p);
  return d.alpha * xi - d.gamma * xi * xi * xi;
}

}  // namespace fwlab
