#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "fwlab/oracle.hpp"
#include "fwlab/profiles.hpp"
#include "fwlab/verify_suite.hpp"

using namespace fwlab;
using Catch::Approx;

TEST_CASE("direct convolution with a narrow mollifier", "[oracle]") {
  const Grid g(20.0, 4096);
  const Field f = Field::sample(g, [](double x) { return std::exp(-x * x / 4.0) * std::cos(x); });
  const double w = 3.0 * g.spacing();
  const Field out = oracle::convolve_direct(
      f, [&](double s) { return std::exp(-s * s / (w * w)) / (w * std::sqrt(std::numbers::pi)); }, 10.0 * w);
  REQUIRE(oracle::max_abs_diff(out, f) <= 1e-3);
  REQUIRE_THROWS_AS(oracle::convolve_direct(f, [](double) { return 1.0; }, 21.0), DomainError);
  REQUIRE_THROWS_AS(oracle::convolve_direct(f, [](double) { return 1.0; }, 0.0), DomainError);
}

TEST_CASE("direct convolution on a plane wave", "[oracle]") {
  const double b = 1.0;
  const Grid g(16.0 * std::numbers::pi, 2048);
  const double xi0 = 0.5;
  const Field c = Field::sample(g, [&](double x) { return std::cos(xi0 * x); });
  const Field out = oracle::convolve_direct(
      c, [&](double s) { return std::exp(-b * std::abs(s)) / (2.0 * b); }, g.half_length());
  Field want = c;
  want *= 1.0 / (b * b + xi0 * xi0);
  // The truncated kernel tail is e^{-bL}.
  REQUIRE(oracle::max_abs_diff(out, want) <= 1e-9);
}

TEST_CASE("direct convolution matches the spectral resolvent", "[oracle]") {
  const ModelParams p;
  const Grid g(64.0, 2048);
  const Field f = Field::sample(g, [](double x) { return std::exp(-x * x); });
  const Field spec = apply_multiplier(f, [&](double xi) { return helmholtz_multiplier(p, xi, 0); });
  const Field direct = oracle::convolve_direct(
      f, [](double s) { return 0.5 * std::exp(-std::abs(s)); }, g.half_length());
  REQUIRE(oracle::max_abs_diff(spec, direct) <= 1e-8);
}

TEST_CASE("finite differences", "[oracle]") {
  const Grid g(8.0, 256);
  const Field ramp = Field::sample(g, [](double x) { return 3.0 * x - 1.0; });
  const Field d = oracle::finite_difference(ramp, 1);
  for (std::size_t j = 1; j + 1 < g.size(); ++j) REQUIRE(d[j] == Approx(3.0).epsilon(1e-12));

  const Grid p(std::numbers::pi, 64);
  const Field s = Field::sample(p, [](double x) { return std::sin(x); });
  const Field ms = Field::sample(p, [](double x) { return -std::sin(x); });
  const double h = p.spacing();
  const double e2 = oracle::max_abs_diff(oracle::finite_difference(s, 2), ms);
  REQUIRE(e2 <= h * h / 12.0 * 1.01);
  REQUIRE(e2 >= h * h / 12.0 * 0.9);
  const double e4 = oracle::max_abs_diff(oracle::finite_difference_richardson(s, 2), ms);
  REQUIRE(e4 <= h * h * h * h);
  REQUIRE_THROWS_AS(oracle::finite_difference(s, 3), ConfigError);
}

TEST_CASE("time derivative of the diffusion wave", "[oracle]") {
  const ModelParams p;
  const auto c = make_profile_constants(p, 0.5);
  const double alpha = derive(p).alpha;
  const Grid g(24.0, 512);
  const double t = 2.0;
  auto snap = [&](double s) { return Field::sample(g, [&](double x) { return chi(x, s, c, p); }); };
  const Field want = Field::sample(g, [&](double x) {
    return -alpha * chi_dx(x, t, 1, c, p) - p.beta * chi(x, t, c, p) * chi_dx(x, t, 1, c, p) +
           p.mu * chi_dx(x, t, 2, c, p);
  });
  auto err = [&](double d, bool five) {
    std::vector<Field> s;
    if (five) s.push_back(snap(t - 2 * d));
    s.push_back(snap(t - d));
    s.push_back(snap(t));
    s.push_back(snap(t + d));
    if (five) s.push_back(snap(t + 2 * d));
    return oracle::max_abs_diff(oracle::time_derivative(s, d, 1), want);
  };
  const double a = err(0.02, false), b = err(0.01, false);
  REQUIRE(a / b == Approx(4.0).epsilon(0.05));
  REQUIRE(err(0.01, true) <= b / 50.0);
  std::vector<Field> two{snap(t), snap(t + 0.1)};
  REQUIRE_THROWS_AS(oracle::time_derivative(two, 0.1, 1), ConfigError);
}

TEST_CASE("reference quadrature", "[oracle]") {
  REQUIRE(oracle::quad_reference([](double x) { return x * x; }, 0.0, 1.0) ==
          Approx(1.0 / 3.0).epsilon(1e-14));
  REQUIRE(oracle::quad_reference_line([](double x) { return std::exp(-x * x); }, 0.0, 1.0, 1e-14) ==
          Approx(std::sqrt(std::numbers::pi)).epsilon(1e-13));
  REQUIRE_THROWS_AS(oracle::quad_reference([](double x) { return x; }, 1.0, 0.0), ConfigError);
  REQUIRE_THROWS_AS(oracle::quad_reference([](double x) { return 1.0 / std::sqrt(std::abs(x)); }, -1.0,
                                           1.0, 1e-15),
                    ToleranceError);
  REQUIRE_THROWS_AS(oracle::quad_reference_line([](double) { return 1.0; }, 0.0, 1.0), ToleranceError);
}

TEST_CASE("verification suite", "[oracle]") {
  const auto all = oracle::run_checks({});
  REQUIRE(all.size() == oracle::default_checks().size());
  for (const auto& r : all) {
    INFO(r.name << ": " << r.max_abs_diff << " > " << r.tolerance);
    REQUIRE(r.passed);
  }
  REQUIRE(oracle::run_checks({}, {}, true).empty());
  REQUIRE(oracle::run_checks({}, {"resolvent_vs_direct_convolution"}).size() == 1);
  REQUIRE_THROWS_AS(oracle::run_checks({}, {"no-such-check"}), ConfigError);

  oracle::VerifyOptions bad;
  bad.flip_resolvent_sign = true;
  const auto neg = oracle::run_checks(bad, {"resolvent_vs_direct_convolution"});
  REQUIRE_FALSE(neg.front().passed);
}
