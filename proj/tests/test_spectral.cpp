#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <thread>

#include "fwlab/analysis.hpp"
#include "fwlab/oracle.hpp"
#include "fwlab/spectral.hpp"

using namespace fwlab;
using Catch::Approx;

namespace {

Field random_field(const Grid& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  return Field::sample(g, [&](double) { return n(rng); });
}

// Smooth periodic test function with a few resolved modes.
Field smooth_field(const Grid& g) {
  const double k = std::numbers::pi / g.half_length();
  return Field::sample(g, [&](double x) {
    return std::sin(3 * k * x) + 0.5 * std::cos(7 * k * x) + 0.25 * std::sin(11 * k * x + 0.3);
  });
}

}  // namespace

TEST_CASE("grid shape and validation", "[spectral]") {
  const Grid g(10.0, 64);
  REQUIRE(g.spacing() * 64 == Approx(20.0).epsilon(1e-15));
  REQUIRE(g.x(0) == -10.0);
  REQUIRE(g.wavenumber(1) == Approx(std::numbers::pi / 10.0));
  REQUIRE(g.wavenumber(32) == Approx(-std::numbers::pi * 32 / 10.0));
  for (std::size_t k = 1; k < 32; ++k) REQUIRE(g.wavenumber(k) == -g.wavenumber(64 - k));
  REQUIRE_THROWS_AS(Grid(10.0, 8), ConfigError);
  REQUIRE_THROWS_AS(Grid(10.0, 33), ConfigError);
  REQUIRE_THROWS_AS(Grid(10.0, 48), ConfigError);
  REQUIRE_NOTHROW(Grid(10.0, 48, false));
  REQUIRE_THROWS_AS(Grid(-1.0, 64), ConfigError);
}

TEST_CASE("transform of a constant has only the zero mode", "[spectral]") {
  const Grid g(5.0, 32);
  const Field f = Field::sample(g, [](double) { return 2.5; });
  const Spectrum s = to_spectrum(f);
  REQUIRE(s[0].real() == Approx(2.5).epsilon(1e-15));
  for (std::size_t k = 1; k < 32; ++k) REQUIRE(std::abs(s[k]) < 1e-15);
}

TEST_CASE("transform of a cosine has exactly two nonzero coefficients", "[spectral]") {
  const double L = 4.0;
  const Grid g(L, 64);
  // cos(2 pi x / L) is mode 2 on [-L, L).
  const Field f = Field::sample(g, [&](double x) { return std::cos(2.0 * std::numbers::pi * x / L); });
  const Spectrum s = to_spectrum(f);
  int nonzero = 0;
  for (std::size_t k = 0; k < 64; ++k)
    if (std::abs(s[k]) > 1e-13) {
      ++nonzero;
      REQUIRE(std::abs(g.mode(k)) == 2);
      REQUIRE(std::abs(s[k]) == Approx(0.5).epsilon(1e-13));
    }
  REQUIRE(nonzero == 2);
}

TEST_CASE("round trip and Parseval on random fields", "[spectral][property]") {
  for (unsigned seed : {1u, 2u, 3u, 4u, 5u}) {
    const Grid g(7.0, 256);
    const Field f = random_field(g, seed);
    const Spectrum s = to_spectrum(f);
    const Field back = from_spectrum(s);
    REQUIRE(oracle::max_abs_diff(back, f) <= 1e-12 * f.max_abs());
    double grid_l2 = 0.0, coeff_l2 = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) grid_l2 += f[j] * f[j] * g.spacing();
    for (std::size_t k = 0; k < s.size(); ++k) coeff_l2 += std::norm(s[k]) * 2.0 * g.half_length();
    REQUIRE(std::abs(grid_l2 - coeff_l2) <= 1e-12 * grid_l2);
  }
}

TEST_CASE("size mismatch is a configuration error", "[spectral]") {
  const Grid g(1.0, 16);
  REQUIRE_THROWS_AS(Spectrum(g, std::vector<cplx>(8)), ConfigError);
  REQUIRE_THROWS_AS(Field(g, std::vector<double>(8)), ConfigError);
  REQUIRE_THROWS_AS(Field(g) + Field(Grid(1.0, 32)), ConfigError);
}

TEST_CASE("derivative of a resolved sine", "[spectral]") {
  const double L = std::numbers::pi * 4.0;
  const Grid g(L, 128);
  const double k0 = 5.0 * std::numbers::pi / L;
  const Field f = Field::sample(g, [&](double x) { return std::sin(k0 * x); });
  const Field exact = Field::sample(g, [&](double x) { return k0 * std::cos(k0 * x); });
  REQUIRE(oracle::max_abs_diff(derivative(f, 1), exact) <= 1e-10);
  REQUIRE(oracle::max_abs_diff(derivative(f, 0), f) == 0.0);
  REQUIRE_THROWS_AS(derivative(f, -1), ConfigError);
  REQUIRE_THROWS_AS(derivative(f, 40), ConfigError);
}

TEST_CASE("spectral second derivative of a Gaussian against finite differences", "[spectral][oracle]") {
  const Grid g(16.0, 4096);
  const Field f = Field::sample(g, [](double x) { return std::exp(-x * x); });
  const auto d2 = derivative(f, 2);
  REQUIRE(oracle::max_abs_diff(d2, oracle::finite_difference(f, 2)) <= 1e-4);
}

TEST_CASE("derivative orders compose", "[spectral][property]") {
  const Grid g(10.0, 64);
  const Field f = smooth_field(g);
  for (int l1 = 0; l1 <= 3; ++l1)
    for (int l2 = 0; l2 <= 3; ++l2) {
      const Field a = derivative(f, l1 + l2);
      const Field b = derivative(derivative(f, l1), l2);
      REQUIRE(oracle::max_abs_diff(a, b) <= 1e-10 * std::max(1.0, a.max_abs()));
    }
}

TEST_CASE("odd derivatives drop the Nyquist mode", "[spectral]") {
  const Grid g(1.0, 16);
  const Field f = Field::sample(g, [&](double) { return 0.0; });
  Field alt(g);
  for (std::size_t j = 0; j < 16; ++j) alt[j] = j % 2 == 0 ? 1.0 : -1.0;
  REQUIRE(derivative(alt, 1).max_abs() < 1e-12);
  REQUIRE(derivative(alt, 2).max_abs() > 1.0);
  REQUIRE(derivative(f, 1).max_abs() == 0.0);
}

TEST_CASE("multiplier examples", "[spectral]") {
  const Grid g(10.0, 128);
  const Field f = smooth_field(g);
  REQUIRE(oracle::max_abs_diff(apply_multiplier(f, [](double) { return cplx(1.0); }), f) <= 1e-14);

  const double xi0 = 6.0 * std::numbers::pi / 10.0;
  const Field c = Field::sample(g, [&](double x) { return std::cos(xi0 * x); });
  const Field s = Field::sample(g, [&](double x) { return std::sin(xi0 * x); });
  const double b = 1.3;
  auto m = [&](double xi) { return cplx(1.0 / (b * b + xi * xi)); };
  REQUIRE(oracle::max_abs_diff(apply_multiplier(c, m), c * (1.0 / (b * b + xi0 * xi0))) <= 1e-14);
  REQUIRE(oracle::max_abs_diff(apply_multiplier(s, m), s * (1.0 / (b * b + xi0 * xi0))) <= 1e-14);
}

TEST_CASE("multiplier on a Gaussian matches the direct exponential-kernel convolution", "[spectral][oracle]") {
  const Grid g(64.0, 2048);
  const Field f = Field::sample(g, [](double x) { return std::exp(-x * x); });
  const double b = 1.0;
  const Field spec = apply_multiplier(f, [&](double xi) { return cplx(1.0 / (b * b + xi * xi)); });
  const Field direct = oracle::convolve_direct(
      f, [b](double s) { return std::exp(-b * std::abs(s)) / (2.0 * b); }, 60.0);
  REQUIRE(oracle::max_abs_diff(spec, direct) <= 1e-8);
}

TEST_CASE("multipliers compose", "[spectral][property]") {
  const Grid g(10.0, 256);
  const Field f = random_field(g, 9);
  auto m1 = [](double xi) { return cplx(1.0 / (1.0 + xi * xi)); };
  auto m2 = [](double xi) { return cplx(std::exp(-0.1 * xi * xi), 0.3 * xi); };
  auto m12 = [&](double xi) { return m1(xi) * m2(xi); };
  const Field a = apply_multiplier(apply_multiplier(f, m1), m2);
  const Field b = apply_multiplier(f, m12);
  REQUIRE(oracle::max_abs_diff(a, b) <= 1e-13 * f.max_abs());
}

TEST_CASE("asymmetric multiplier with a real output request is rejected", "[spectral]") {
  const Grid g(1.0, 32);
  const Field f = random_field(g, 2);
  REQUIRE_THROWS_AS(apply_multiplier(f, [](double xi) { return cplx(xi > 0 ? 1.0 : 2.0); }), ConfigError);
  REQUIRE_NOTHROW(apply_multiplier(f, [](double xi) { return cplx(xi > 0 ? 1.0 : 2.0); }, false));
}

TEST_CASE("dealiasing", "[spectral]") {
  const Grid g(3.0, 64);
  Spectrum white(g);
  for (std::size_t k = 0; k < 64; ++k) white[k] = cplx(1.0, 0.5);
  const Spectrum d = dealias(white);
  std::size_t kept = 0, expected = 0;
  for (long m = -32; m < 32; ++m)
    if (3 * std::abs(m) <= 64) ++expected;
  for (std::size_t k = 0; k < 64; ++k) kept += std::abs(d[k]) > 0.0;
  REQUIRE(kept == expected);
  REQUIRE(kept == 2 * 21 + 1);

  const Spectrum dd = dealias(d);
  for (std::size_t k = 0; k < 64; ++k) REQUIRE(dd[k] == d[k]);

  Spectrum s(g);
  for (std::size_t k = 0; k < 64; ++k)
    if (std::abs(g.mode(k)) <= 10) s[k] = cplx(1.0 / (1.0 + k), 0.1 * g.mode(k));
  const Spectrum sd = dealias(s);
  for (std::size_t k = 0; k < 64; ++k) REQUIRE(sd[k] == s[k]);
}

TEST_CASE("antiderivative of a zero-mean field", "[spectral]") {
  const Grid g(20.0, 512);
  const Field f = Field::sample(g, [](double x) { return -2.0 * x * std::exp(-x * x); });
  const Field F = antiderivative_zero_mean(f);
  const Field exact = Field::sample(g, [](double x) { return std::exp(-x * x); });
  REQUIRE(oracle::max_abs_diff(F, exact) <= 1e-13);
}

TEST_CASE("decay guard", "[spectral]") {
  const Grid g(20.0, 256);
  const Field narrow = Field::sample(g, [](double x) { return std::exp(-x * x); });
  const Field wide = Field::sample(g, [](double x) { return std::exp(-x * x / 50.0); });
  REQUIRE(decay_guard(narrow).ok);
  REQUIRE_FALSE(decay_guard(wide).ok);
  REQUIRE_NOTHROW(require_decay(narrow, "narrow"));
  try {
    require_decay(wide, "wide", 4.5);
    FAIL("expected a truncation error");
  } catch (const DomainTruncationError& e) {
    REQUIRE(e.time == 4.5);
  }
}

TEST_CASE("concurrent transforms on distinct fields agree with serial ones", "[spectral][concurrency]") {
  const Grid g(10.0, 1024);
  std::vector<Field> in, serial, parallel(8);
  for (unsigned k = 0; k < 8; ++k) {
    in.push_back(random_field(g, 100 + k));
    serial.push_back(derivative(in.back(), 2));
  }
  std::vector<std::thread> pool;
  for (std::size_t k = 0; k < 8; ++k)
    pool.emplace_back([&, k] {
      for (int rep = 0; rep < 20; ++rep) parallel[k] = derivative(in[k], 2);
    });
  for (auto& t : pool) t.join();
  for (std::size_t k = 0; k < 8; ++k) REQUIRE(oracle::max_abs_diff(parallel[k], serial[k]) == 0.0);
}

TEST_CASE("lp norms of simple fields", "[spectral][analysis]") {
  const Grid g(std::numbers::pi, 256);
  const Field c = Field::sample(g, [](double) { return -3.0; });
  REQUIRE(lp_norm(c, kInfNorm, 0) == 3.0);
  const double k0 = 4.0;
  const Field s = Field::sample(g, [&](double x) { return std::sin(k0 * x); });
  REQUIRE(lp_norm(s, 2.0, 1) == Approx(k0 * std::sqrt(std::numbers::pi)).epsilon(1e-12));
}
