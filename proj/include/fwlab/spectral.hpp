#pragma once

// Discrete Fourier machinery on the periodic grid: transforms, spectral
// derivatives, multipliers and 2/3-rule dealiasing. Backed by FFTW.

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "fwlab/errors.hpp"
#include "fwlab/grid.hpp"

namespace fwlab {

using cplx = std::complex<double>;

namespace detail {

// FFTW's planner is not thread safe; plan creation is serialized here and the
// plans are shared. Execution goes through the new-array interface, which is
// safe to call concurrently. FFTW_UNALIGNED keeps results independent of
// where std::vector happened to place its buffer.
class FftPlans {
 public:
  static const FftPlans& get(std::size_t n) {
    static std::mutex mu;
    static std::map<std::size_t, std::unique_ptr<FftPlans>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[n];
    if (!slot) slot.reset(new FftPlans(n));
    return *slot;
  }
  FftPlans(const FftPlans&) = delete;
  FftPlans& operator=(const FftPlans&) = delete;
  ~FftPlans() {
    fftw_destroy_plan(r2c_);
    fftw_destroy_plan(c2r_);
  }

  void forward(const double* in, cplx* out) const {
    fftw_execute_dft_r2c(r2c_, const_cast<double*>(in), reinterpret_cast<fftw_complex*>(out));
  }
  // Destroys `in`.
  void backward(cplx* in, double* out) const {
    fftw_execute_dft_c2r(c2r_, reinterpret_cast<fftw_complex*>(in), out);
  }

 private:
  explicit FftPlans(std::size_t n) {
    const int ni = static_cast<int>(n);
    std::vector<double> r(n);
    std::vector<cplx> c(n / 2 + 1);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    r2c_ = fftw_plan_dft_r2c_1d(ni, r.data(), reinterpret_cast<fftw_complex*>(c.data()), flags);
    c2r_ = fftw_plan_dft_c2r_1d(ni, reinterpret_cast<fftw_complex*>(c.data()), r.data(), flags);
  }
  fftw_plan r2c_ = nullptr;
  fftw_plan c2r_ = nullptr;
};

}  // namespace detail

/// Half-spectrum real transform for hot loops: slots k = 0..N/2, coefficients
/// normalized by 1/N so that slot 0 is the mean.
class RealTransform {
 public:
  explicit RealTransform(const Grid& g)
      : grid_(g), plans_(&detail::FftPlans::get(g.size())), scratch_(g.size() / 2 + 1) {}

  const Grid& grid() const { return grid_; }
  std::size_t half_size() const { return grid_.size() / 2 + 1; }

  void forward(std::span<const double> in, std::span<cplx> out) const {
    plans_->forward(in.data(), out.data());
    const double inv = 1.0 / static_cast<double>(grid_.size());
    for (auto& c : out) c *= inv;
  }
  /// Leaves `in` untouched (copies into an internal scratch buffer).
  void backward(std::span<const cplx> in, std::span<double> out) {
    std::copy(in.begin(), in.end(), scratch_.begin());
    plans_->backward(scratch_.data(), out.data());
  }

 private:
  Grid grid_;
  const detail::FftPlans* plans_;
  std::vector<cplx> scratch_;
};

/// Fourier coefficients c_k = (1/N) sum_j u_j exp(-2 pi i j k / N) in FFT slot
/// order (see Grid::wavenumber). With this normalization
/// sum_j |u_j|^2 h = 2L sum_k |c_k|^2.
class Spectrum {
 public:
  Spectrum() = default;
  explicit Spectrum(const Grid& g) : grid_(g), coeffs_(g.size()) {}
  Spectrum(const Grid& g, std::vector<cplx> c) : grid_(g), coeffs_(std::move(c)) {
    if (coeffs_.size() != grid_.size()) throw ConfigError("spectrum: size does not match grid");
  }
  const Grid& grid() const { return grid_; }
  std::size_t size() const { return coeffs_.size(); }
  std::span<const cplx> coeffs() const { return coeffs_; }
  std::span<cplx> coeffs() { return coeffs_; }
  cplx operator[](std::size_t k) const { return coeffs_[k]; }
  cplx& operator[](std::size_t k) { return coeffs_[k]; }

 private:
  Grid grid_;
  std::vector<cplx> coeffs_;
};

inline Spectrum to_spectrum(const Field& f) {
  const auto& g = f.grid();
  const std::size_t n = g.size();
  RealTransform fft(g);
  std::vector<cplx> half(n / 2 + 1);
  fft.forward(f.values(), half);
  Spectrum s(g);
  for (std::size_t k = 0; k <= n / 2; ++k) s[k] = half[k];
  for (std::size_t k = n / 2 + 1; k < n; ++k) s[k] = std::conj(half[n - k]);
  return s;
}

/// Real part of the inverse transform, i.e. the inverse of the Hermitian
/// projection of `s`.
inline Field from_spectrum(const Spectrum& s) {
  const auto& g = s.grid();
  const std::size_t n = g.size();
  std::vector<cplx> half(n / 2 + 1);
  half[0] = s[0].real();
  for (std::size_t k = 1; k < n / 2; ++k) half[k] = 0.5 * (s[k] + std::conj(s[n - k]));
  half[n / 2] = s[n / 2].real();
  Field out(g);
  RealTransform fft(g);
  fft.backward(half, out.values());
  return out;
}

namespace detail {

// Applies a multiplier given on slots 0..N/2 to a real field. The Nyquist slot
// uses the real part of its multiplier: its partner +pi N/(2L) is not on the
// grid, and odd symbols are zeroed there.
template <class M>
Field apply_half_multiplier(const Field& f, M&& m_of_slot) {
  const auto& g = f.grid();
  const std::size_t n = g.size();
  RealTransform fft(g);
  std::vector<cplx> half(n / 2 + 1);
  fft.forward(f.values(), half);
  for (std::size_t k = 0; k < n / 2; ++k) half[k] *= m_of_slot(k);
  half[n / 2] *= m_of_slot(n / 2).real();
  Field out(g);
  fft.backward(half, out.values());
  return out;
}

inline cplx ipow(double xi, int l) {
  cplx r(1.0, 0.0);
  const cplx ixi(0.0, xi);
  for (int k = 0; k < l; ++k) r *= ixi;
  return r;
}

}  // namespace detail

/// d^l f / dx^l via (i xi)^l. The Nyquist mode is dropped for odd l.
inline Field derivative(const Field& f, int l) {
  if (l < 0) throw ConfigError("derivative: order must be >= 0");
  if (static_cast<std::size_t>(l) > f.size() / 4)
    throw ConfigError("derivative: order exceeds N/4");
  if (l == 0) return f;
  const auto& g = f.grid();
  return detail::apply_half_multiplier(f, [&](std::size_t k) {
    if (k == g.size() / 2 && l % 2 == 1) return cplx(0.0);
    return detail::ipow(g.wavenumber(k), l);
  });
}

using Multiplier = std::function<cplx(double)>;

/// Scales each mode by m(xi). With `require_real`, m(-xi) must equal
/// conj(m(xi)) on every resolved pair; otherwise a ConfigError is thrown.
inline Field apply_multiplier(const Field& f, const Multiplier& m, bool require_real = true) {
  const auto& g = f.grid();
  const std::size_t n = g.size();
  if (require_real) {
    for (std::size_t k = 0; k < n / 2; ++k) {
      const double xi = g.wavenumber(k);
      const cplx a = m(xi);
      const cplx b = m(-xi);
      const double scale = std::abs(a) + std::abs(b);
      if (std::abs(b - std::conj(a)) > 1e-12 * scale)
        throw ConfigError("apply_multiplier: m(-xi) != conj(m(xi)); output would not be real");
    }
  }
  return detail::apply_half_multiplier(f, [&](std::size_t k) { return m(g.wavenumber(k)); });
}

/// Highest retained |mode| under the 2/3 rule: floor(N/3).
inline long dealias_cutoff(const Grid& g) { return static_cast<long>(g.size()) / 3; }

/// Zeroes modes with |k| > N/3. Idempotent.
inline Spectrum dealias(Spectrum s) {
  const auto& g = s.grid();
  const long cut = dealias_cutoff(g);
  for (std::size_t k = 0; k < g.size(); ++k)
    if (std::abs(g.mode(k)) > cut) s[k] = 0.0;
  return s;
}

/// Antiderivative int_{-L}^x f for fields with (numerically) zero mean,
/// via 1/(i xi) on the nonzero modes.
inline Field antiderivative_zero_mean(const Field& f) {
  const auto& g = f.grid();
  Field F = detail::apply_half_multiplier(f, [&](std::size_t k) {
    if (k == 0 || k == g.size() / 2) return cplx(0.0);
    return 1.0 / cplx(0.0, g.wavenumber(k));
  });
  const double base = F[0];
  for (auto& v : F.values()) v -= base;
  return F;
}

}  // namespace fwlab
