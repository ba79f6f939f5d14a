#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "fwlab/analysis.hpp"
#include "fwlab/oracle.hpp"
#include "fwlab/solver.hpp"

using namespace fwlab;
using Catch::Approx;

namespace {

Field gaussian(const Grid& g, double amp, double width, double center = 0.0) {
  return Field::sample(g, [&](double x) {
    const double y = (x - center) / width;
    return amp * std::exp(-y * y);
  });
}

SolverConfig config(double dt, std::vector<double> times, bool moving = false) {
  SolverConfig c;
  c.dt = dt;
  c.t_end = times.back();
  c.snapshot_times = std::move(times);
  c.moving_frame = moving;
  return c;
}

double variance(const Field& f) {
  const auto& g = f.grid();
  double m0 = 0.0, m1 = 0.0, m2 = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double x = g.x(j);
    m0 += f[j];
    m1 += x * f[j];
    m2 += x * x * f[j];
  }
  const double mean = m1 / m0;
  return m2 / m0 - mean * mean;
}

double relative_mass_drift(const Trajectory& t) {
  const double m0 = t.snapshots.front().integral();
  double d = 0.0;
  for (const auto& s : t.snapshots) d = std::max(d, std::abs(s.integral() - m0));
  return d / std::abs(m0);
}

}  // namespace

TEST_CASE("equation kinds", "[solver]") {
  REQUIRE_NOTHROW(EquationKind::viscous_fw().validate());
  EquationKind bad = EquationKind::burgers();
  bad.forcing = [](double, double) { return 0.0; };
  REQUIRE_THROWS_AS(bad.validate(), ConfigError);
  EquationKind aux{EquationTag::AuxLinear, {}, {}};
  REQUIRE_THROWS_AS(aux.validate(), ConfigError);
  ModelParams p;
  REQUIRE_NOTHROW(EquationKind::aux_linear(p, make_profile_constants(p, 0.1)).validate());
}

TEST_CASE("moving-frame symbol equals the lab symbol minus the drift", "[solver]") {
  ModelParams p;
  p.cap_b = 1.3;
  p.small_b = 0.8;
  const double alpha = derive(p).alpha;
  for (double xi : {0.01, 0.3, 1.0, 4.0, 40.0}) {
    REQUIRE(linear_phase(p, EquationTag::ViscousFW, xi, true) ==
            Approx(dispersion_symbol(p, xi) - alpha * xi).epsilon(1e-12).margin(1e-14));
    REQUIRE(linear_phase(p, EquationTag::KdVBurgers, xi, true) ==
            Approx(kdvb_symbol(p, xi) - alpha * xi).epsilon(1e-12).margin(1e-14));
    REQUIRE(linear_phase(p, EquationTag::Burgers, xi, true) == 0.0);
  }
}

TEST_CASE("linear propagator examples", "[solver]") {
  ModelParams p;
  const Grid g(20.0, 256);
  const Field f = gaussian(g, 1.0, 1.0);
  const Spectrum s = to_spectrum(f);
  const Spectrum same = linear_propagator(p, EquationKind::viscous_fw(), s, 0.0);
  for (std::size_t k = 0; k < s.size(); ++k) REQUIRE(same[k] == s[k]);

  ModelParams q = p;
  q.beta = 0.0;
  const double dt = 0.37;
  const Spectrum a = linear_propagator(p, EquationKind::viscous_fw(), s, dt);
  const Spectrum b = linear_propagator(q, EquationKind::viscous_fw(), s, dt);
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double xi = g.wavenumber(k);
    REQUIRE(a[k] == b[k]);
    if (std::abs(s[k]) > 1e-200)
      REQUIRE(std::abs(a[k]) / std::abs(s[k]) == Approx(std::exp(-p.mu * dt * xi * xi)).epsilon(1e-13));
  }
  REQUIRE_THROWS_AS(linear_propagator(p, EquationKind::viscous_fw(), s, -1.0), ConfigError);
}

TEST_CASE("linear propagator matches the Fourier-integral synthesis", "[solver][oracle]") {
  ModelParams p;
  const Grid g(40.0, 512);
  const Field u0 = gaussian(g, 1.0, 1.0);
  const double t = 1.0;
  const Field prop = from_spectrum(linear_propagator(p, EquationKind::viscous_fw(), to_spectrum(u0), t));
  double diff = 0.0;
  for (std::size_t j = 0; j < g.size(); j += 4) {
    const double x = g.x(j);
    const double ref = oracle::quad_reference(
        [&](double xi) {
          return std::exp(-(p.mu * t + 0.25) * xi * xi) * std::cos(xi * x - dispersion_symbol(p, xi) * t) /
                 std::sqrt(std::numbers::pi);
        },
        0.0, 14.0, 1e-12);
    diff = std::max(diff, std::abs(ref - prop[j]));
  }
  REQUIRE(diff <= 1e-8);
}

TEST_CASE("linear propagator is a semigroup", "[solver][property]") {
  ModelParams p;
  const Grid g(30.0, 512);
  const Spectrum s = to_spectrum(gaussian(g, 1.0, 1.5, 2.0));
  for (const auto& kind : {EquationKind::viscous_fw(), EquationKind::kdv_burgers(), EquationKind::burgers()})
    for (bool moving : {false, true}) {
      const Spectrum two = linear_propagator(p, kind, linear_propagator(p, kind, s, 0.3, moving), 0.45, moving);
      const Spectrum one = linear_propagator(p, kind, s, 0.75, moving);
      REQUIRE(oracle::max_abs_diff(from_spectrum(two), from_spectrum(one)) <= 1e-13);
    }
}

TEST_CASE("green function", "[solver]") {
  ModelParams p;
  const Grid g(96.0, 2048);
  for (double t : {0.5, 2.0, 10.0}) {
    REQUIRE(green_function_field(p, g, t).integral() == Approx(1.0).epsilon(1e-13));
    REQUIRE(green_function_field(p, g, t, true).integral() == Approx(1.0).epsilon(1e-13));
  }
  REQUIRE_THROWS_AS(green_function_field(p, g, 0.0), DomainError);

  ModelParams heat = p;
  heat.cap_b = 0.0;
  const double t = 3.0;
  const Field T = green_function_field(heat, g, t);
  const Field G = Field::sample(g, [&](double x) { return g_eval(x, t, heat.mu); });
  REQUIRE(oracle::max_abs_diff(T, G) <= 1e-12);

  const Field f = gaussian(g, 1.0, 3.0);
  const Field Tf = from_spectrum(linear_propagator(p, EquationKind::viscous_fw(), to_spectrum(f), 1e-3));
  REQUIRE(oracle::max_abs_diff(Tf, f) <= 1e-3);

  // t large against L: the kernel reaches the box edges.
  REQUIRE_THROWS_AS(green_function_field(p, Grid(10.0, 256), 40.0), DomainTruncationError);
}

TEST_CASE("heat step spreads a Gaussian by 2 mu dt", "[solver]") {
  ModelParams p;
  p.beta = 0.0;
  p.cap_b = 0.0;
  p.mu = 0.7;
  const Grid g(30.0, 512);
  const double s0 = 1.0;
  const Field u0 = Field::sample(g, [&](double x) { return std::exp(-x * x / (4.0 * p.mu * s0)); });
  SolverConfig cfg = config(0.05, {0.05});
  const Field u1 = step(p, EquationKind::burgers(), cfg, u0, 0.0);
  REQUIRE(variance(u1) - variance(u0) == Approx(2.0 * p.mu * cfg.dt).epsilon(1e-10));
}

TEST_CASE("Burgers from the diffusion wave reproduces it", "[solver]") {
  ModelParams p;
  const auto c = make_profile_constants(p, 0.1);
  const Grid g(96.0, 1024);
  const Field u0 = Field::sample(g, [&](double x) { return chi(x, 0.0, c, p); });
  std::vector<double> times;
  for (int k = 0; k <= 20; ++k) times.push_back(k * 1.0);
  const auto traj = simulate(p, EquationKind::burgers(), config(0.05, times, true), u0);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const Field exact = sample_at(traj, i, [&](double x, double t) { return chi(x, t, c, p); });
    REQUIRE(oracle::max_abs_diff(traj.snapshots[i], exact) <= 1e-6 * u0.max_abs());
  }
}

TEST_CASE("single steps conserve mass to round-off", "[solver]") {
  ModelParams p;
  const Grid g(40.0, 512);
  Field u = gaussian(g, 0.05, 1.0) + gaussian(g, 0.03, 0.7, 2.0);
  const double m0 = u.integral();
  const SolverConfig cfg = config(0.05, {0.05});
  for (const auto& kind : {EquationKind::viscous_fw(), EquationKind::kdv_burgers(), EquationKind::burgers()}) {
    Field v = u;
    for (int k = 0; k < 20; ++k) {
      const Field next = step(p, kind, cfg, v, k * cfg.dt);
      REQUIRE(std::abs(next.integral() - v.integral()) <= 1e-13 * std::abs(m0));
      v = next;
    }
  }
}

TEST_CASE("zero data stays zero", "[solver]") {
  ModelParams p;
  const Grid g(16.0, 128);
  const auto traj = simulate(p, EquationKind::viscous_fw(), config(0.05, {0.0, 0.5, 1.0}), Field(g));
  REQUIRE(traj.size() == 3);
  for (const auto& s : traj.snapshots) REQUIRE(s.max_abs() == 0.0);
}

TEST_CASE("KdV-Burgers and Burgers agree in the B -> 0 limit", "[solver]") {
  ModelParams p;
  p.cap_b = 1e-12;
  const Grid g(40.0, 512);
  const Field u0 = gaussian(g, 0.2, 1.0);
  const auto cfg = config(0.05, {10.0});
  const auto a = simulate(p, EquationKind::kdv_burgers(), cfg, u0);
  const auto b = simulate(p, EquationKind::burgers(), cfg, u0);
  REQUIRE(oracle::max_abs_diff(a.snapshots.back(), b.snapshots.back()) <= 1e-8);
}

TEST_CASE("small-data sup norm decays like t^(-1/2)", "[solver][slow]") {
  ModelParams p;
  const Grid g(320.0, 2048);
  const Field u0 = gaussian(g, 0.05, 1.0);
  std::vector<double> times{0.0};
  for (int k = 0; k <= 40; ++k) times.push_back(20.0 * std::pow(25.0, k / 40.0));
  times.back() = 500.0;
  for (auto& t : times) t = std::round(t * 10.0) / 10.0;
  SolverConfig cfg = config(0.1, times, true);
  cfg.accuracy_cap = 0.1;
  const auto traj = simulate(p, EquationKind::viscous_fw(), cfg, u0);
  NormSeries s;
  for (std::size_t i = 1; i < traj.size(); ++i) s.push(traj.times[i], traj.snapshots[i].max_abs());
  const auto fit = decay_fit(s, 0, FitWindow{20.0, 500.0});
  REQUIRE(fit.exponent >= -0.65);
  REQUIRE(fit.exponent <= -0.35);
  REQUIRE(relative_mass_drift(traj) <= 1e-10);
}

TEST_CASE("mass is conserved along trajectories of every nonlinear kind", "[solver][property]") {
  ModelParams p;
  const Grid g(192.0, 2048);
  const Field u0 = gaussian(g, 0.08, 1.0) + gaussian(g, -0.03, 1.5, 3.0);
  for (const auto& kind : {EquationKind::viscous_fw(), EquationKind::kdv_burgers(), EquationKind::burgers()})
    for (auto scheme : {Scheme::ETDRK4, Scheme::ImexBdf2}) {
      auto cfg = config(0.05, {0.0, 1.0, 5.0, 20.0}, true);
      cfg.scheme = scheme;
      const auto traj = simulate(p, kind, cfg, u0);
      REQUIRE(relative_mass_drift(traj) <= 1e-10);
    }
}

TEST_CASE("moving-frame and static-frame runs agree", "[solver][property]") {
  ModelParams p;
  const double t = 10.0;
  const double shift = derive(p).alpha * t;  // 20, a whole number of grid steps
  const Grid moving_grid(64.0, 1024);
  const Grid static_grid(128.0, 2048);
  const auto cfg_m = config(0.05, {t}, true);
  const auto cfg_s = config(0.05, {t}, false);
  const auto a = simulate(p, EquationKind::viscous_fw(), cfg_m, gaussian(moving_grid, 0.1, 1.0));
  const auto b = simulate(p, EquationKind::viscous_fw(), cfg_s, gaussian(static_grid, 0.1, 1.0));
  REQUIRE(a.frame_shift_at_t(t) == shift);
  const double h = moving_grid.spacing();
  const auto offset = static_cast<std::size_t>(std::llround((64.0 + shift) / h));
  double diff = 0.0;
  for (std::size_t j = 0; j < moving_grid.size(); ++j)
    diff = std::max(diff, std::abs(a.snapshots[0][j] - b.snapshots[0][j + offset]));
  // Nodes coincide, so there is no interpolation error to allow for; what
  // remains is the step error of the two differently stiff formulations.
  REQUIRE(diff <= 1e-9);
}

TEST_CASE("step-size convergence matches the scheme order", "[solver][property]") {
  ModelParams p;
  const Grid g(64.0, 1024);
  const Field u0 = gaussian(g, 0.25, 1.0);
  const double t_end = 2.0;
  auto run = [&](Scheme s, double dt) {
    auto cfg = config(dt, {t_end});
    cfg.scheme = s;
    cfg.accuracy_cap = 1.0;
    return simulate(p, EquationKind::viscous_fw(), cfg, u0).snapshots.back();
  };
  SECTION("ETDRK4") {
    const double dt = 0.2;
    const Field ref = run(Scheme::ETDRK4, dt / 8.0);
    const double e1 = oracle::max_abs_diff(run(Scheme::ETDRK4, dt), ref);
    const double e2 = oracle::max_abs_diff(run(Scheme::ETDRK4, dt / 2.0), ref);
    const double order = std::log2(e1 / e2);
    REQUIRE(order >= 4.0 - 1.0);
    REQUIRE(order <= 4.0 + 1.0);
  }
  SECTION("IMEX-BDF2") {
    const double dt = 0.1;
    const Field ref = run(Scheme::ImexBdf2, dt / 8.0);
    const double e1 = oracle::max_abs_diff(run(Scheme::ImexBdf2, dt), ref);
    const double e2 = oracle::max_abs_diff(run(Scheme::ImexBdf2, dt / 2.0), ref);
    const double order = std::log2(e1 / e2);
    REQUIRE(order >= 2.0 - 1.0);
    REQUIRE(order <= 2.0 + 1.0);
  }
}

TEST_CASE("solver errors", "[solver]") {
  ModelParams p;
  const Grid g(32.0, 256);
  const Field u0 = gaussian(g, 0.05, 1.0);

  SECTION("dt above the CFL limit") {
    auto cfg = config(0.2, {1.0});
    REQUIRE_THROWS_AS(simulate(p, EquationKind::viscous_fw(), cfg, u0), ConfigError);
    REQUIRE(cfl_limit(u0) == 0.05);
    REQUIRE(cfl_limit(u0 * 100.0) == Approx(0.5 * g.spacing() / 5.0));
  }
  SECTION("snapshot outside [0, t_end]") {
    auto cfg = config(0.05, {1.0});
    cfg.snapshot_times = {0.5, 2.0};
    REQUIRE_THROWS_AS(simulate(p, EquationKind::viscous_fw(), cfg, u0), ConfigError);
  }
  SECTION("IMEX-BDF2 off the dt lattice") {
    auto cfg = config(0.05, {0.525});
    cfg.scheme = Scheme::ImexBdf2;
    REQUIRE_THROWS_AS(simulate(p, EquationKind::viscous_fw(), cfg, u0), ConfigError);
  }
  SECTION("non-finite data") {
    Field bad = u0;
    bad[3] = NAN;
    REQUIRE_THROWS_AS(simulate(p, EquationKind::viscous_fw(), config(0.05, {1.0}), bad), ConfigError);
  }
  SECTION("blow-up reports time and amplitude") {
    auto cfg = config(0.05, {1.0});
    cfg.blowup_amplitude = 0.01;
    try {
      simulate(p, EquationKind::viscous_fw(), cfg, u0);
      FAIL("expected blow-up");
    } catch (const BlowUpError& e) {
      REQUIRE(e.time == 0.0);
      REQUIRE(e.amplitude == Approx(0.05));
    }
  }
  SECTION("domain too small mid-run") {
    try {
      simulate(p, EquationKind::viscous_fw(), config(0.05, {0.0, 0.5, 30.0}, true), u0);
      FAIL("expected a truncation error");
    } catch (const DomainTruncationError& e) {
      REQUIRE(e.time == 30.0);
    }
  }
}

TEST_CASE("simulate is deterministic", "[solver]") {
  ModelParams p;
  const Grid g(96.0, 1024);
  const Field u0 = gaussian(g, 0.05, 1.0, 0.5);
  const auto cfg = config(0.05, {0.0, 2.0, 7.5}, true);
  const auto a = simulate(p, EquationKind::viscous_fw(), cfg, u0);
  const auto b = simulate(p, EquationKind::viscous_fw(), cfg, u0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < g.size(); ++j) REQUIRE(a.snapshots[i][j] == b.snapshots[i][j]);
}
