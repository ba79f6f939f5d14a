#pragma once

// Brute-force reference implementations. Nothing here touches the FFT code:
// convolutions are direct sums, derivatives are stencils, and the reference
// quadrature is a plain adaptive Simpson rule.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fwlab/errors.hpp"
#include "fwlab/grid.hpp"

namespace fwlab::oracle {

struct OracleReport {
  std::string name;
  double max_abs_diff = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

inline OracleReport make_report(std::string name, double diff, double tol) {
  return {std::move(name), diff, tol, std::isfinite(diff) && diff <= tol};
}

inline double max_abs_diff(const Field& a, const Field& b) {
  if (!(a.grid() == b.grid())) throw ConfigError("oracle: grid mismatch");
  double m = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
  return m;
}

namespace detail {

// Gregory end corrections (through sixth differences) for the trapezoid
// rule on g[0..n], h = 1. The rule stays accurate when the integrand is only
// smooth on the closed interval, e.g. a kernel with a kink at an endpoint.
inline double gregory(std::span<const double> g) {
  const std::size_t n = g.size() - 1;
  if (n < 7) throw ConfigError("oracle: Gregory rule needs at least 8 nodes");
  double s = 0.5 * (g[0] + g[n]);
  for (std::size_t j = 1; j < n; ++j) s += g[j];
  static constexpr double c[] = {1.0 / 12.0,         -1.0 / 24.0,   19.0 / 720.0,
                                 -3.0 / 160.0,       863.0 / 60480.0, -275.0 / 24192.0};
  std::vector<double> fwd(g.begin(), g.begin() + 7);
  std::vector<double> bwd(g.end() - 7, g.end());
  std::reverse(bwd.begin(), bwd.end());
  for (int k = 0; k < 6; ++k) {
    for (std::size_t i = 0; i + 1 < fwd.size() - k; ++i) {
      fwd[i] = fwd[i + 1] - fwd[i];
      bwd[i] = bwd[i + 1] - bwd[i];
    }
    s += c[k] * (fwd[0] + bwd[0]);
  }
  return s;
}

}  // namespace detail

/// (kernel * f)(x_j) = int_{-r}^{r} kernel(s) f(x_j - s) ds by direct
/// summation over the periodic samples, split at s = 0 so that kernels with a
/// kink at the origin are integrated to high order. r is rounded down to a
/// multiple of the spacing. O(N * r/h).
inline Field convolve_direct(const Field& f, const std::function<double(double)>& kernel,
                             double radius) {
  const auto& g = f.grid();
  if (!(radius > 0.0) || radius > g.half_length())
    throw DomainError("convolve_direct: radius must be in (0, L]");
  const double h = g.spacing();
  const auto m = static_cast<std::size_t>(std::floor(radius / h + 1e-9));
  const std::size_t n = g.size();
  std::vector<double> kp(m + 1), km(m + 1);
  for (std::size_t k = 0; k <= m; ++k) {
    kp[k] = kernel(static_cast<double>(k) * h);
    km[k] = kernel(-static_cast<double>(k) * h);
  }
  Field out(g);
  std::vector<double> right(m + 1), left(m + 1);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k <= m; ++k) {
      right[k] = kp[k] * f[(j + n - k % n) % n];
      left[k] = km[k] * f[(j + k) % n];
    }
    out[j] = h * (detail::gregory(right) + detail::gregory(left));
  }
  return out;
}

/// Centered second-order stencil for d/dx (l = 1) or d^2/dx^2 (l = 2) with
/// periodic wrap and index step `stride`.
inline Field finite_difference(const Field& f, int l, std::size_t stride = 1) {
  if (l != 1 && l != 2) throw ConfigError("finite_difference: l must be 1 or 2");
  const auto& g = f.grid();
  const std::size_t n = g.size();
  const double h = g.spacing() * static_cast<double>(stride);
  Field out(g);
  for (std::size_t j = 0; j < n; ++j) {
    const double fp = f[(j + stride) % n];
    const double fm = f[(j + n - stride % n) % n];
    out[j] = l == 1 ? (fp - fm) / (2.0 * h) : (fp - 2.0 * f[j] + fm) / (h * h);
  }
  return out;
}

/// Richardson extrapolation of the spacings h and 2h: fourth order.
inline Field finite_difference_richardson(const Field& f, int l) {
  Field a = finite_difference(f, l, 1);
  const Field b = finite_difference(f, l, 2);
  for (std::size_t j = 0; j < a.size(); ++j) a[j] = (4.0 * a[j] - b[j]) / 3.0;
  return a;
}

/// d/dt (l = 1) or d^2/dt^2 (l = 2) at the middle of three snapshots spaced
/// by delta. With five snapshots (t-2d, t-d, t, t+d, t+2d) the result is
/// Richardson-extrapolated.
inline Field time_derivative(std::span<const Field> snaps, double delta, int l = 1) {
  if (l != 1 && l != 2) throw ConfigError("time_derivative: l must be 1 or 2");
  if (snaps.size() != 3 && snaps.size() != 5)
    throw ConfigError("time_derivative: needs 3 or 5 consecutive snapshots");
  const auto stencil = [&](const Field& m, const Field& c, const Field& p, double d) {
    Field out(c.grid());
    for (std::size_t j = 0; j < out.size(); ++j)
      out[j] = l == 1 ? (p[j] - m[j]) / (2.0 * d) : (p[j] - 2.0 * c[j] + m[j]) / (d * d);
    return out;
  };
  if (snaps.size() == 3) return stencil(snaps[0], snaps[1], snaps[2], delta);
  Field fine = stencil(snaps[1], snaps[2], snaps[3], delta);
  const Field coarse = stencil(snaps[0], snaps[2], snaps[4], 2.0 * delta);
  for (std::size_t j = 0; j < fine.size(); ++j) fine[j] = (4.0 * fine[j] - coarse[j]) / 3.0;
  return fine;
}

namespace detail {

struct SimpsonState {
  const std::function<double(double)>* g;
  long evals = 0;
  long budget = 0;
};

inline double simpson_rec(SimpsonState& st, double a, double b, double fa, double fm, double fb,
                          double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = (*st.g)(lm);
  const double frm = (*st.g)(rm);
  st.evals += 2;
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  if (depth <= 0 || st.evals > st.budget)
    throw ToleranceError("quad_reference: no convergence on [" + std::to_string(a) + ", " +
                         std::to_string(b) + "]");
  return simpson_rec(st, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(st, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson on [a, b] with absolute error target tol. The interval
/// is pre-split into 16 panels so narrow peaks are not missed.
inline double quad_reference(const std::function<double(double)>& g, double a, double b,
                             double tol = 1e-12) {
  if (!(b > a)) throw ConfigError("quad_reference: need a < b");
  detail::SimpsonState st{&g, 0, 20'000'000};
  constexpr int kPanels = 16;
  const double w = (b - a) / kPanels;
  double total = 0.0;
  for (int i = 0; i < kPanels; ++i) {
    const double lo = a + i * w;
    const double hi = i + 1 == kPanels ? b : lo + w;
    const double fa = g(lo), fb = g(hi), fm = g(0.5 * (lo + hi));
    const double whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
    total += detail::simpson_rec(st, lo, hi, fa, fm, fb, whole, tol / kPanels, 60);
  }
  return total;
}

/// Whole-line integral of a function that decays like a Gaussian of width
/// `scale` about `center`: truncated where |g| < 1e-14 of its sampled peak.
inline double quad_reference_line(const std::function<double(double)>& g, double center,
                                  double scale, double tol = 1e-12) {
  const double step = 0.05 * scale;
  double peak = 0.0;
  const int probes = 4000;
  for (int i = 0; i <= probes; ++i)
    peak = std::max({peak, std::abs(g(center + i * step)), std::abs(g(center - i * step))});
  if (peak == 0.0) return 0.0;
  int r = probes;
  while (r > 0 && std::abs(g(center + r * step)) < 1e-14 * peak &&
         std::abs(g(center - r * step)) < 1e-14 * peak)
    --r;
  if (r == probes) throw ToleranceError("quad_reference_line: integrand does not decay");
  const double radius = (r + 1) * step;
  return quad_reference(g, center - radius, center, tol / 2) +
         quad_reference(g, center, center + radius, tol / 2);
}

}  // namespace fwlab::oracle
