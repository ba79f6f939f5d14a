#pragma once

// Periodic grid on [-L, L) and real-space sample containers. Transform code
// lives in spectral.hpp; this header is shared with the oracle module, which
// must not depend on it.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "fwlab/errors.hpp"

namespace fwlab {

class Grid {
 public:
  Grid() = default;

  /// N must be even and >= 16; powers of two are required unless
  /// `require_power_of_two` is false.
  Grid(double half_length, std::size_t size, bool require_power_of_two = true)
      : half_length_(half_length), size_(size) {
    if (!(half_length > 0.0) || !std::isfinite(half_length))
      throw ConfigError("grid: half-length L must be positive");
    if (size < 16 || size % 2 != 0) throw ConfigError("grid: N must be even and >= 16");
    if (require_power_of_two && (size & (size - 1)) != 0)
      throw ConfigError("grid: N must be a power of two (N = " + std::to_string(size) + ")");
  }

  double half_length() const { return half_length_; }
  std::size_t size() const { return size_; }
  double spacing() const { return 2.0 * half_length_ / static_cast<double>(size_); }
  double x(std::size_t j) const { return -half_length_ + static_cast<double>(j) * spacing(); }

  /// Signed mode index of FFT slot k: 0, 1, ..., N/2-1, -N/2, ..., -1.
  long mode(std::size_t k) const {
    const long n = static_cast<long>(size_);
    const long kk = static_cast<long>(k);
    return kk < n / 2 ? kk : kk - n;
  }
  /// Wavenumber of FFT slot k, pi k / L. The Nyquist slot N/2 carries -pi N/(2L).
  double wavenumber(std::size_t k) const {
    return std::numbers::pi * static_cast<double>(mode(k)) / half_length_;
  }
  std::vector<double> wavenumbers() const {
    std::vector<double> out(size_);
    for (std::size_t k = 0; k < size_; ++k) out[k] = wavenumber(k);
    return out;
  }
  std::vector<double> points() const {
    std::vector<double> out(size_);
    for (std::size_t j = 0; j < size_; ++j) out[j] = x(j);
    return out;
  }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.half_length_ == b.half_length_ && a.size_ == b.size_;
  }

 private:
  double half_length_ = 1.0;
  std::size_t size_ = 16;
};

/// Real samples u(x_j), x_j = -L + j h.
class Field {
 public:
  Field() = default;
  explicit Field(const Grid& g) : grid_(g), values_(g.size(), 0.0) {}
  Field(const Grid& g, std::vector<double> values) : grid_(g), values_(std::move(values)) {
    if (values_.size() != grid_.size()) throw ConfigError("field: size does not match grid");
  }
  template <class F>
  static Field sample(const Grid& g, F&& f) {
    Field out(g);
    for (std::size_t j = 0; j < g.size(); ++j) out.values_[j] = f(g.x(j));
    return out;
  }

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double operator[](std::size_t j) const { return values_[j]; }
  double& operator[](std::size_t j) { return values_[j]; }

  double max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }
  bool all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
  }
  /// Rectangle-rule integral, exact trapezoid for periodic data.
  double integral() const {
    double s = 0.0;
    for (double v : values_) s += v;
    return s * grid_.spacing();
  }

  Field& operator+=(const Field& o) {
    check_same(o);
    for (std::size_t j = 0; j < values_.size(); ++j) values_[j] += o.values_[j];
    return *this;
  }
  Field& operator-=(const Field& o) {
    check_same(o);
    for (std::size_t j = 0; j < values_.size(); ++j) values_[j] -= o.values_[j];
    return *this;
  }
  Field& operator*=(double c) {
    for (double& v : values_) v *= c;
    return *this;
  }
  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(Field a, double c) { return a *= c; }
  friend Field operator*(double c, Field a) { return a *= c; }

 private:
  void check_same(const Field& o) const {
    if (!(grid_ == o.grid_)) throw ConfigError("field: grid mismatch");
  }
  Grid grid_;
  std::vector<double> values_;
};

struct DecayGuardReport {
  bool ok = true;
  double edge_max = 0.0;  // max |u| in the outer band
  double peak = 0.0;      // max |u| overall
};

/// Whole-line surrogates must satisfy |u| < rel * max|u| in the outer
/// `outer_fraction` of the box on each side.
inline DecayGuardReport decay_guard(const Field& f, double rel = 1e-10,
                                    double outer_fraction = 0.05) {
  DecayGuardReport r;
  r.peak = f.max_abs();
  const auto& g = f.grid();
  const double inner = (1.0 - outer_fraction) * g.half_length();
  for (std::size_t j = 0; j < g.size(); ++j)
    if (std::abs(g.x(j)) >= inner) r.edge_max = std::max(r.edge_max, std::abs(f[j]));
  r.ok = r.edge_max <= rel * r.peak;
  return r;
}

inline void require_decay(const Field& f, const std::string& what, double t = 0.0,
                          double rel = 1e-10) {
  const auto r = decay_guard(f, rel);
  if (!r.ok) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3e", r.edge_max / r.peak);
    throw DomainTruncationError(what + ": domain too small (edge/peak = " + buf + ")", t);
  }
}

}  // namespace fwlab
