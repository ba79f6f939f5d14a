#pragma once

// Pseudo-spectral time integration on the periodic grid.
//
// Every kind is written as  u_t = L u + N(u, t)  with L diagonal in Fourier
// space, L(xi) = -mu xi^2 - i phase(xi), integrated exactly per mode. N is the
// dealiased conservative nonlinearity -(beta/2)(u^2)_x, or for the auxiliary
// linear problem -(a v)_x + f with a = beta chi and f = -(2B/b^3) chi_xxx.
// Time stepping is ETDRK4 (Kassam-Trefethen contour coefficients) or
// IMEX-BDF2 with an extrapolated explicit part.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "fwlab/errors.hpp"
#include "fwlab/grid.hpp"
#include "fwlab/model.hpp"
#include "fwlab/profiles.hpp"
#include "fwlab/spectral.hpp"

namespace fwlab {

enum class EquationTag { ViscousFW, KdVBurgers, Burgers, AuxLinear };
enum class Scheme { ETDRK4, ImexBdf2 };

inline const char* to_string(EquationTag t) {
  switch (t) {
    case EquationTag::ViscousFW: return "ViscousFW";
    case EquationTag::KdVBurgers: return "KdVBurgers";
    case EquationTag::Burgers: return "Burgers";
    case EquationTag::AuxLinear: return "AuxLinear";
  }
  return "?";
}

inline const char* to_string(Scheme s) { return s == Scheme::ETDRK4 ? "ETDRK4" : "IMEX-BDF2"; }

using SpaceTimeFn = std::function<double(double, double)>;  // (x, t) in the lab frame

struct EquationKind {
  EquationTag tag = EquationTag::ViscousFW;
  SpaceTimeFn forcing;    // AuxLinear only
  SpaceTimeFn transport;  // AuxLinear only: a(x,t) in -(a v)_x

  static EquationKind viscous_fw() { return {EquationTag::ViscousFW, {}, {}}; }
  static EquationKind kdv_burgers() { return {EquationTag::KdVBurgers, {}, {}}; }
  static EquationKind burgers() { return {EquationTag::Burgers, {}, {}}; }
  static EquationKind aux_linear(SpaceTimeFn forcing, SpaceTimeFn transport) {
    return {EquationTag::AuxLinear, std::move(forcing), std::move(transport)};
  }
  /// v_t + alpha v_x + (beta chi v)_x - mu v_xx = -(2B/b^3) chi_xxx.
  static EquationKind aux_linear(const ModelParams& p, const ProfileConstants& c) {
    const double gamma = derive(p).gamma;
    return aux_linear([p, c, gamma](double x, double t) { return -gamma * chi_dx(x, t, 3, c, p); },
                      [p, c](double x, double t) { return p.beta * chi(x, t, c, p); });
  }

  void validate() const {
    const bool aux = tag == EquationTag::AuxLinear;
    if (aux != static_cast<bool>(forcing))
      throw ConfigError("equation kind: forcing must be present iff kind is AuxLinear");
    if (aux && !transport) throw ConfigError("equation kind: AuxLinear needs a transport coefficient");
  }
};

struct SolverConfig {
  double dt = 0.05;
  double t_end = 1.0;
  std::vector<double> snapshot_times;  // sorted, within [0, t_end]
  bool moving_frame = false;
  Scheme scheme = Scheme::ETDRK4;
  double accuracy_cap = 0.05;         // dt upper bound independent of the data
  double blowup_amplitude = 1e8;      // max|u| beyond this is reported as blow-up
  bool check_decay = true;            // decay guard on every stored snapshot

  void validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("solver: dt must be > 0");
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ConfigError("solver: t_end must be > 0");
    for (std::size_t i = 0; i < snapshot_times.size(); ++i) {
      const double s = snapshot_times[i];
      if (!(s >= 0.0 && s <= t_end))
        throw ConfigError("solver: snapshot time " + std::to_string(s) + " outside [0, t_end]");
      if (i > 0 && !(s > snapshot_times[i - 1]))
        throw ConfigError("solver: snapshot times must be strictly increasing");
    }
  }
};

/// Largest admissible dt: min(0.5 h / max|u|, cap).
inline double cfl_limit(const Field& u, double cap = 0.05) {
  const double m = u.max_abs();
  if (m == 0.0) return cap;
  return std::min(0.5 * u.grid().spacing() / m, cap);
}

struct Trajectory {
  ModelParams params;
  EquationKind kind;
  Grid grid;
  SolverConfig config;
  std::vector<double> times;
  std::vector<Field> snapshots;

  /// Lab position of frame coordinate zeta is zeta + frame_shift_at_t(t).
  double frame_shift_at_t(double t) const {
    return config.moving_frame ? derive(params).alpha * t : 0.0;
  }
  std::size_t size() const { return times.size(); }
};

// ---------------------------------------------------------------------------

/// Phase of the linear part, d/dx -> i xi, mode evolves as exp(-i phase t).
inline double linear_phase(const ModelParams& p, EquationTag tag, double xi, bool moving_frame) {
  const auto d = derive(p);
  switch (tag) {
    case EquationTag::ViscousFW:
      if (moving_frame) return -d.alpha * xi * xi * xi / (p.small_b * p.small_b + xi * xi);
      return dispersion_symbol(p, xi);
    case EquationTag::KdVBurgers:
      if (moving_frame) return -d.gamma * xi * xi * xi;
      return kdvb_symbol(p, xi);
    case EquationTag::Burgers:
    case EquationTag::AuxLinear:
      return moving_frame ? 0.0 : d.alpha * xi;
  }
  return 0.0;
}

/// L(xi) = -mu xi^2 - i phase(xi).
inline cplx linear_symbol(const ModelParams& p, EquationTag tag, double xi, bool moving_frame) {
  return {-p.mu * xi * xi, -linear_phase(p, tag, xi, moving_frame)};
}

/// Exact linear evolution over dt. The Nyquist slot keeps only the real
/// (diffusive) part of the symbol.
inline Spectrum linear_propagator(const ModelParams& p, const EquationKind& kind, Spectrum s,
                                  double dt, bool moving_frame = false) {
  if (!(dt >= 0.0)) throw ConfigError("linear_propagator: dt must be >= 0");
  const auto& g = s.grid();
  for (std::size_t k = 0; k < g.size(); ++k) {
    cplx l = linear_symbol(p, kind.tag, g.wavenumber(k), moving_frame);
    if (k == g.size() / 2) l = l.real();
    s[k] *= std::exp(l * dt);
  }
  return s;
}

/// Green function T(x,t) of the linear part (in the co-moving frame when
/// `moving_frame`, i.e. T(zeta + alpha t, t)).
inline Field green_function_field(const ModelParams& p, const Grid& g, double t,
                                  bool moving_frame = false) {
  if (!(t > 0.0)) throw DomainError("green_function_field: t must be > 0");
  Field delta(g);
  delta[g.size() / 2] = 1.0 / g.spacing();  // x = 0
  Field out = detail::apply_half_multiplier(delta, [&](std::size_t k) {
    return std::exp(linear_symbol(p, EquationTag::ViscousFW, g.wavenumber(k), moving_frame) * t);
  });
  require_decay(out, "green_function_field", t);
  return out;
}

namespace detail {

class Integrator {
 public:
  Integrator(const ModelParams& p, const EquationKind& kind, const Grid& g, bool moving_frame,
             double blowup_amplitude)
      : p_(p),
        kind_(kind),
        grid_(g),
        moving_(moving_frame),
        blowup_(blowup_amplitude),
        fft_(g),
        half_(g.size() / 2 + 1),
        lin_(half_),
        ik_(half_),
        u_(g.size()),
        w_(g.size()),
        wh_(half_) {
    const long cut = dealias_cutoff(g);
    for (std::size_t k = 0; k < half_; ++k) {
      const double xi = g.wavenumber(k);
      lin_[k] = linear_symbol(p, kind.tag, xi, moving_frame);
      if (k == half_ - 1) lin_[k] = lin_[k].real();
      ik_[k] = (static_cast<long>(k) <= cut) ? cplx(0.0, xi) : cplx(0.0);
    }
    if (kind.tag == EquationTag::AuxLinear) f_.resize(g.size());
  }

  std::size_t half() const { return half_; }
  std::span<const cplx> symbol() const { return lin_; }

  void to_half(std::span<const double> u, std::span<cplx> v) { fft_.forward(u, v); }
  void to_real(std::span<const cplx> v, std::span<double> u) { fft_.backward(v, u); }

  /// N(v, t) in half-spectrum form.
  void nonlinear(std::span<const cplx> v, double t, std::span<cplx> out) {
    fft_.backward(v, u_);
    double amp = 0.0;
    for (double x : u_) amp = std::max(amp, std::abs(x));
    if (!std::isfinite(amp) || amp > blowup_) {
      throw BlowUpError("solver: blow-up at t = " + std::to_string(t) +
                            " (max|u| = " + std::to_string(amp) + ")",
                        t, amp);
    }
    if (kind_.tag == EquationTag::AuxLinear) {
      const double shift = moving_ ? derive(p_).alpha * t : 0.0;
      for (std::size_t j = 0; j < u_.size(); ++j) {
        const double x = grid_.x(j) + shift;
        w_[j] = kind_.transport(x, t) * u_[j];
        f_[j] = kind_.forcing(x, t);
      }
      fft_.forward(w_, wh_);
      fft_.forward(f_, out);
      for (std::size_t k = 0; k < half_; ++k) out[k] -= ik_[k] * wh_[k];
      out[half_ - 1] = out[half_ - 1].real();
      return;
    }
    for (std::size_t j = 0; j < u_.size(); ++j) w_[j] = u_[j] * u_[j];
    fft_.forward(w_, wh_);
    const double c = -0.5 * p_.beta;
    for (std::size_t k = 0; k < half_; ++k) out[k] = c * ik_[k] * wh_[k];
  }

 private:
  ModelParams p_;
  EquationKind kind_;
  Grid grid_;
  bool moving_;
  double blowup_;
  RealTransform fft_;
  std::size_t half_;
  std::vector<cplx> lin_;
  std::vector<cplx> ik_;  // i xi on retained modes, 0 beyond the 2/3 cutoff
  std::vector<double> u_, w_, f_;
  std::vector<cplx> wh_;
};

// ETDRK4 coefficients for one step size, evaluated on a circle of radius 1
// around each h L to avoid cancellation near zero.
struct EtdCoefficients {
  double h = -1.0;
  std::vector<cplx> e, e2, q, f1, f2, f3;

  void build(std::span<const cplx> lin, double step) {
    constexpr int kContour = 32;
    h = step;
    const std::size_t n = lin.size();
    e.resize(n);
    e2.resize(n);
    q.resize(n);
    f1.resize(n);
    f2.resize(n);
    f3.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      const cplx z = step * lin[k];
      e[k] = std::exp(z);
      e2[k] = std::exp(0.5 * z);
      cplx sq(0.0), s1(0.0), s2(0.0), s3(0.0);
      for (int j = 0; j < kContour; ++j) {
        const double th = 2.0 * std::numbers::pi * (j + 0.5) / kContour;
        const cplx r = z + cplx(std::cos(th), std::sin(th));
        const cplx er = std::exp(r);
        const cplx r3 = r * r * r;
        sq += (std::exp(0.5 * r) - 1.0) / r;
        s1 += (-4.0 - r + er * (4.0 - 3.0 * r + r * r)) / r3;
        s2 += (2.0 + r + er * (r - 2.0)) / r3;
        s3 += (-4.0 - 3.0 * r - r * r + er * (4.0 - r)) / r3;
      }
      const double w = step / kContour;
      q[k] = w * sq;
      f1[k] = w * s1;
      f2[k] = w * s2;
      f3[k] = w * s3;
    }
  }
};

class Stepper {
 public:
  Stepper(const ModelParams& p, const EquationKind& kind, const Grid& g, const SolverConfig& cfg)
      : cfg_(cfg), it_(p, kind, g, cfg.moving_frame, cfg.blowup_amplitude) {
    const std::size_t n = it_.half();
    for (auto* b : {&nv_, &na_, &nb_, &nc_, &a_, &b_, &c_, &prev_n_, &prev_v_}) b->resize(n);
  }

  Integrator& integrator() { return it_; }

  /// One ETDRK4 step of size h on v at time t.
  void etdrk4(std::vector<cplx>& v, double t, double h) {
    if (coef_.h != h) coef_.build(it_.symbol(), h);
    const auto& c = coef_;
    const std::size_t n = v.size();
    it_.nonlinear(v, t, nv_);
    for (std::size_t k = 0; k < n; ++k) a_[k] = c.e2[k] * v[k] + c.q[k] * nv_[k];
    it_.nonlinear(a_, t + 0.5 * h, na_);
    for (std::size_t k = 0; k < n; ++k) b_[k] = c.e2[k] * v[k] + c.q[k] * na_[k];
    it_.nonlinear(b_, t + 0.5 * h, nb_);
    for (std::size_t k = 0; k < n; ++k) c_[k] = c.e2[k] * a_[k] + c.q[k] * (2.0 * nb_[k] - nv_[k]);
    it_.nonlinear(c_, t + h, nc_);
    for (std::size_t k = 0; k < n; ++k)
      v[k] = c.e[k] * v[k] + c.f1[k] * nv_[k] + 2.0 * c.f2[k] * (na_[k] + nb_[k]) +
             c.f3[k] * nc_[k];
  }

  /// One IMEX-BDF2 step of size h; the first call bootstraps with ETDRK4.
  void bdf2(std::vector<cplx>& v, double t, double h) {
    if (!have_history_ || bdf_h_ != h) {
      it_.nonlinear(v, t, prev_n_);
      prev_v_ = v;
      etdrk4(v, t, h);
      have_history_ = true;
      bdf_h_ = h;
      return;
    }
    const auto lin = it_.symbol();
    it_.nonlinear(v, t, nv_);
    for (std::size_t k = 0; k < v.size(); ++k) {
      const cplx next = (4.0 * v[k] - prev_v_[k] + 2.0 * h * (2.0 * nv_[k] - prev_n_[k])) /
                        (3.0 - 2.0 * h * lin[k]);
      prev_v_[k] = v[k];
      prev_n_[k] = nv_[k];
      v[k] = next;
    }
  }

  void advance(std::vector<cplx>& v, double t, double h) {
    if (cfg_.scheme == Scheme::ETDRK4)
      etdrk4(v, t, h);
    else
      bdf2(v, t, h);
  }

 private:
  SolverConfig cfg_;
  Integrator it_;
  EtdCoefficients coef_;
  std::vector<cplx> nv_, na_, nb_, nc_, a_, b_, c_;
  std::vector<cplx> prev_n_, prev_v_;
  bool have_history_ = false;
  double bdf_h_ = -1.0;
};

inline void check_inputs(const ModelParams& p, const EquationKind& kind, const SolverConfig& cfg,
                         const Field& u0) {
  p.validate(true);
  kind.validate();
  cfg.validate();
  if (!u0.all_finite()) throw ConfigError("solver: initial data not finite");
  if (cfg.dt > cfl_limit(u0, cfg.accuracy_cap) * (1.0 + 1e-12))
    throw ConfigError("solver: dt = " + std::to_string(cfg.dt) + " violates the CFL limit " +
                      std::to_string(cfl_limit(u0, cfg.accuracy_cap)));
}

}  // namespace detail

/// One time step of size cfg.dt from (f, t). For IMEX-BDF2, which needs two
/// levels, this is the scheme's ETDRK4 starting step.
inline Field step(const ModelParams& p, const EquationKind& kind, const SolverConfig& cfg,
                  const Field& f, double t) {
  detail::check_inputs(p, kind, cfg, f);
  detail::Stepper st(p, kind, f.grid(), cfg);
  std::vector<cplx> v(f.size() / 2 + 1);
  st.integrator().to_half(f.values(), v);
  st.etdrk4(v, t, cfg.dt);
  Field out(f.grid());
  st.integrator().to_real(v, out.values());
  if (!out.all_finite()) throw BlowUpError("solver: non-finite field after step", t + cfg.dt, INFINITY);
  return out;
}

/// Integrates from u0 at t = 0 and stores the field at each snapshot time.
/// ETDRK4 shortens the steps between consecutive snapshots to land on them
/// exactly; IMEX-BDF2 requires every snapshot time on the dt lattice.
inline Trajectory simulate(const ModelParams& p, const EquationKind& kind, const SolverConfig& cfg,
                           const Field& u0) {
  detail::check_inputs(p, kind, cfg, u0);
  if (cfg.check_decay) require_decay(u0, "simulate: initial data", 0.0);

  Trajectory traj{p, kind, u0.grid(), cfg, {}, {}};
  detail::Stepper st(p, kind, u0.grid(), cfg);
  std::vector<cplx> v(u0.size() / 2 + 1);
  st.integrator().to_half(u0.values(), v);

  double t = 0.0;
  for (double target : cfg.snapshot_times) {
    const double span = target - t;
    if (span > 0.0) {
      std::size_t n = 0;
      double h = cfg.dt;
      if (cfg.scheme == Scheme::ETDRK4) {
        n = static_cast<std::size_t>(std::ceil(span / cfg.dt * (1.0 - 1e-12)));
        n = std::max<std::size_t>(n, 1);
        h = span / static_cast<double>(n);
      } else {
        const double steps = span / cfg.dt;
        n = static_cast<std::size_t>(std::llround(steps));
        if (n == 0 || std::abs(steps - static_cast<double>(n)) > 1e-9 * std::max(1.0, steps))
          throw ConfigError("solver: IMEX-BDF2 needs snapshot times on the dt lattice (t = " +
                            std::to_string(target) + ")");
      }
      for (std::size_t i = 0; i < n; ++i) {
        st.advance(v, t, h);
        t = (i + 1 == n) ? target : t + h;
      }
    }
    Field snap(u0.grid());
    st.integrator().to_real(v, snap.values());
    if (!snap.all_finite()) throw BlowUpError("solver: non-finite snapshot", t, INFINITY);
    if (cfg.check_decay) require_decay(snap, "simulate", t);
    traj.times.push_back(target);
    traj.snapshots.push_back(std::move(snap));
  }
  return traj;
}

}  // namespace fwlab
