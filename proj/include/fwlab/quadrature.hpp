#pragma once

// Quadrature building blocks shared by the profile evaluators.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "fwlab/errors.hpp"

namespace fwlab::quad {

/// Relative size below which a whole-line integrand counts as zero. Every
/// integral over R in the library truncates where |f| < kTailRel * peak.
inline constexpr double kTailRel = 1e-14;

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [a, b] (Newton on P_n).
inline Rule gauss_legendre(std::size_t n, double a, double b) {
  Rule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = 0.0;
      for (std::size_t k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / static_cast<double>(k);
      }
      dp = static_cast<double>(n) * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    r.nodes[i] = mid - half * z;
    r.nodes[n - 1 - i] = mid + half * z;
    r.weights[i] = r.weights[n - 1 - i] = half * w;
  }
  return r;
}

/// Smallest R (on a lattice of `step`) such that |f(x)| < kTailRel * peak for
/// every probed |x - center| >= R, scanning out to `max_radius`.
inline double tail_radius(const std::function<double(double)>& f, double center, double step,
                          double max_radius) {
  double peak = 0.0;
  const int n = static_cast<int>(std::ceil(max_radius / step));
  std::vector<double> mags(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double dx = i * step;
    mags[i] = std::max(std::abs(f(center + dx)), std::abs(f(center - dx)));
    peak = std::max(peak, mags[i]);
  }
  if (peak == 0.0) return step;
  for (int i = n; i >= 0; --i)
    if (mags[i] >= kTailRel * peak) {
      if (i == n) throw ToleranceError("tail_radius: integrand not negligible at max radius");
      return (i + 1) * step;
    }
  return step;
}

/// Adaptive Gauss-Kronrod (15 point) on [a, b] to relative tolerance `tol`.
inline double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                 double tol = 1e-13) {
  double err = 0.0;
  double l1 = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 25, tol,
                                                                                 &err, &l1);
  if (!(err <= std::max(1e-10 * l1, 1e-15)))
    throw ToleranceError("integrate_adaptive: no convergence (error estimate " +
                         std::to_string(err) + ")");
  return v;
}

/// Integral over R of a Gaussian-tailed function, truncated per kTailRel.
/// `scale` is the natural width used to size the probe lattice.
inline double integrate_line(const std::function<double(double)>& f, double center, double scale,
                             double tol = 1e-13) {
  const double r = tail_radius(f, center, 0.05 * scale, 200.0 * scale);
  // Split at the center so the Kronrod panels see the peak.
  return integrate_adaptive(f, center - r, center, tol) + integrate_adaptive(f, center, center + r, tol);
}

/// Barycentric interpolant at Chebyshev points of the second kind on [a, b].
class Chebyshev {
 public:
  Chebyshev() = default;
  Chebyshev(double a, double b, std::size_t n) : a_(a), b_(b), x_(n + 1), w_(n + 1), y_(n + 1) {
    for (std::size_t j = 0; j <= n; ++j) {
      const double u = std::cos(std::numbers::pi * static_cast<double>(j) / static_cast<double>(n));
      x_[j] = 0.5 * (a + b) + 0.5 * (b - a) * u;
      w_[j] = (j % 2 == 0 ? 1.0 : -1.0) * ((j == 0 || j == n) ? 0.5 : 1.0);
    }
  }
  std::span<const double> nodes() const { return x_; }
  std::span<double> values() { return y_; }
  double lower() const { return a_; }
  double upper() const { return b_; }

  /// Zero outside [a, b].
  double operator()(double x) const {
    if (x < a_ || x > b_ || x_.empty()) return 0.0;
    double num = 0.0;
    double den = 0.0;
    for (std::size_t j = 0; j < x_.size(); ++j) {
      const double d = x - x_[j];
      if (d == 0.0) return y_[j];
      const double c = w_[j] / d;
      num += c * y_[j];
      den += c;
    }
    return num / den;
  }

 private:
  double a_ = 0.0;
  double b_ = 0.0;
  std::vector<double> x_;
  std::vector<double> w_;
  std::vector<double> y_;
};

}  // namespace fwlab::quad
