#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "qdsim/errors.hpp"
#include "qdsim/spectral.hpp"
#include "qdsim/spline.hpp"
#include "qdsim/units.hpp"
#include "qdsim/wavefunction.hpp"

using namespace qdsim;
using doctest::Approx;

TEST_CASE("standard unit system") {
  const UnitSystem u = UnitSystem::standard();
  // hbar^2 / (2 * 1.08 me * (20 nm)^2), recomputed by hand
  const double hbar = 1.054571817e-34;
  const double E0 = hbar * hbar / (2.0 * 1.08 * 9.109e-31 * 400e-18);
  CHECK(u.E0 == Approx(E0).epsilon(1e-12));
  CHECK(u.E0 == Approx(1.413084e-23).epsilon(1e-5));
  CHECK(u.t0 == Approx(2.0 * std::numbers::pi * hbar / E0).epsilon(1e-12));
  CHECK(u.hbar_dimensionless == Approx(1.0 / (2.0 * std::numbers::pi)).epsilon(1e-12));
  // stated values 87.6 ueV and 47.3 ps agree with the definitions to about 1%
  CHECK(u.E0_ueV() == Approx(87.6).epsilon(0.01));
  CHECK(u.t0 * 1e12 == Approx(47.3).epsilon(0.01));
}

TEST_CASE("unit conversion round trips") {
  const UnitSystem u = UnitSystem::standard();
  CHECK(to_dimensionless(20.0, "nm", u) == Approx(1.0));
  CHECK(to_dimensionless(1.0, "x0", u) == 1.0);
  CHECK(from_dimensionless(1.0, "ueV", u) == Approx(u.E0_ueV()));
  CHECK(to_dimensionless(u.t0 * 1e12, "ps", u) == Approx(1.0));
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> d(-1e3, 1e3);
  for (const char* label : {"m", "nm", "J", "eV", "meV", "ueV", "s", "ns", "ps", "E0", "t0"}) {
    for (int i = 0; i < 20; ++i) {
      const double v = d(rng);
      CHECK(from_dimensionless(to_dimensionless(v, label, u), label, u) == Approx(v).epsilon(1e-12));
    }
  }
  CHECK(convert(2.0, Quantity::length, Direction::from_dimensionless, u) == Approx(40e-9));
  CHECK_THROWS_AS(parse_unit("furlong"), InvalidArgument);
  CHECK_THROWS_AS(parse_quantity("mass"), InvalidArgument);
  CHECK_THROWS_AS(UnitSystem::from(-1.0, 1.0), InvalidArgument);
}

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(Grid(500, 1.0), InvalidArgument);
  CHECK_THROWS_AS(Grid(2, 1.0), InvalidArgument);
  CHECK_THROWS_AS(Grid(64, 0.0), InvalidArgument);
  const Grid g(8, 4.0, -1.0);
  CHECK(g.spacing() == 0.5);
  CHECK(g.x(0) == -1.0);
  CHECK(g.end() == 3.0);
}

TEST_CASE("norm, overlap and density") {
  const Grid g(64, 2.0);
  WaveState s = WaveState::zeros(g);
  for (std::size_t i = 1; i < 64; ++i) s.amplitudes[i] = {std::sin(std::numbers::pi * g.x(i) / 2.0), 0.3};
  normalize(s);
  CHECK(norm(s) == Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(overlap(s, s) - cplx(1.0, 0.0)) < 1e-14);
  WaveState zero = WaveState::zeros(g);
  CHECK_THROWS_AS(normalize(zero), NumericError);
  CHECK_THROWS_AS(overlap(s, WaveState::zeros(Grid(32, 2.0))), InvalidArgument);
  double sum = 0.0;
  for (double d : density(s)) sum += d * g.spacing();
  CHECK(sum == Approx(1.0));
}

TEST_CASE("dot probabilities match a sub-cell brute force") {
  const Grid g(128, 10.0, -0.3);
  WaveState s = WaveState::zeros(g);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  for (auto& a : s.amplitudes) a = {nd(rng), nd(rng)};
  normalize(s);
  const std::vector<Interval> dots{{0.11, 2.37}, {2.37, 6.05}, {7.5, 9.62}};
  const auto p = dot_probabilities(s, dots);

  // every cell cut into 1000 slivers, each sliver counted if its midpoint is inside
  const double dx = g.spacing();
  for (std::size_t r = 0; r < dots.size(); ++r) {
    double acc = 0.0;
    for (std::size_t i = 0; i < g.n_points(); ++i) {
      for (int q = 0; q < 1000; ++q) {
        const double x = g.x(i) - 0.5 * dx + (q + 0.5) * dx / 1000.0;
        if (x >= dots[r].lo && x < dots[r].hi) acc += std::norm(s.amplitudes[i]) * dx / 1000.0;
      }
    }
    CHECK(p[r] == Approx(acc).epsilon(1e-3));
  }
  // regions covering every cell collect the whole norm
  const std::vector<Interval> all{{g.offset() - dx, g.end() + dx}};
  CHECK(dot_probabilities(s, all)[0] == Approx(1.0).epsilon(1e-12));
  const std::vector<Interval> bad{{0.0, 2.0}, {1.0, 3.0}};
  CHECK_THROWS_AS(dot_probabilities(s, bad), InvalidArgument);
}

TEST_CASE("energy expectation of infinite-well modes") {
  const double L = 5.0;
  const Grid g(256, L);
  const std::vector<double> v(g.n_points(), 0.0);
  for (int m : {1, 3, 17}) {
    WaveState s = WaveState::zeros(g);
    for (std::size_t i = 0; i < g.n_points(); ++i) s.amplitudes[i] = std::sin(m * std::numbers::pi * g.x(i) / L);
    normalize(s);
    const auto e = energy_expectation(s, v);
    CHECK(e.value == Approx(std::pow(m * std::numbers::pi / L, 2)).epsilon(1e-12));
    CHECK_FALSE(e.normalization_warning);
  }
  // constant potential shifts the energy
  WaveState s = WaveState::zeros(g);
  for (std::size_t i = 0; i < g.n_points(); ++i) s.amplitudes[i] = std::sin(std::numbers::pi * g.x(i) / L) * 2.0;
  const std::vector<double> c(g.n_points(), 3.0);
  const auto e = energy_expectation(s, c);
  CHECK(e.value == Approx(std::pow(std::numbers::pi / L, 2) + 3.0).epsilon(1e-12));
  CHECK(e.normalization_warning);
}

TEST_CASE("sine transform round trip") {
  const Grid g(64, 3.0);
  SineTransform t(g);
  std::vector<cplx> psi(64), out(64);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  for (std::size_t i = 1; i < 64; ++i) psi[i] = {nd(rng), nd(rng)};
  t.load(psi);
  t.forward();
  t.backward();
  t.store(out);
  for (std::size_t i = 0; i < 64; ++i) CHECK(std::abs(out[i] - psi[i]) < 1e-13);
  CHECK(t.wavenumbers()[1] == Approx(std::numbers::pi / 3.0));
  CHECK(t.wavenumbers()[127] == Approx(-std::numbers::pi / 3.0));
}

TEST_CASE("spline interpolates and never overshoots") {
  const std::vector<double> xs{0, 1, 2, 3, 4, 5};
  const std::vector<double> ys{0, 0, 1, 1, 0, 0};
  const CubicSpline s(xs, ys);
  for (std::size_t i = 0; i < xs.size(); ++i) CHECK(s(xs[i]) == Approx(ys[i]));
  for (double x = -1.0; x <= 6.0; x += 0.01) {
    CHECK(s(x) >= -1e-15);
    CHECK(s(x) <= 1.0 + 1e-15);
  }
  CHECK(s(-3.0) == 0.0);
  CHECK_THROWS_AS(CubicSpline(std::vector<double>{0, 1, 1, 2}, std::vector<double>{0, 1, 2, 3}), InvalidArgument);
  CHECK_THROWS_AS(CubicSpline(std::vector<double>{0, 1}, std::vector<double>{0, 1}), InvalidArgument);
}
