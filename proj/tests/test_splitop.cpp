#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "qdsim/eigensolver.hpp"
#include "qdsim/errors.hpp"
#include "qdsim/splitop.hpp"

using namespace qdsim;
using doctest::Approx;

namespace {

constexpr double pi = std::numbers::pi;

// Harmonic-like single well sampled as a table: v = 8 (x - 5)^2 on [0, 10].
EmbeddedPotential harmonic() {
  std::vector<double> xs, vs;
  for (int i = 0; i <= 400; ++i) {
    const double x = 0.025 * i;
    xs.push_back(x);
    vs.push_back(8.0 * (x - 5.0) * (x - 5.0));
  }
  return EmbeddedPotential(SampledPotential(xs, vs), 0.0, 10.0);
}

WaveState gaussian(const Grid& g, double x0, double sigma, double k0) {
  WaveState s = WaveState::zeros(g);
  for (std::size_t i = 1; i < g.n_points(); ++i) {
    const double x = g.x(i);
    s.amplitudes[i] = std::exp(-std::pow(x - x0, 2) / (4 * sigma * sigma)) * std::polar(1.0, k0 * x);
  }
  normalize(s);
  return s;
}

double l2_distance(const WaveState& a, const WaveState& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.amplitudes.size(); ++i) s += std::norm(a.amplitudes[i] - b.amplitudes[i]);
  return std::sqrt(s * a.grid.spacing());
}

EvolutionTrace run(const WaveState& s, const BarrierSchedule& sched, double dt, std::size_t steps,
                   std::size_t stride) {
  PropagatorConfig c;
  c.dt = dt;
  c.n_steps = steps;
  c.record_stride = stride;
  return evolve(s, sched, c, {});
}

}  // namespace

TEST_CASE("free Gaussian spreads and moves as the analytic packet") {
  // i/(2 pi) psi_t = -psi_xx, i.e. psi_t = i D psi_xx with D = 2 pi:
  // <x> moves at 2 D k0, sigma(t)^2 = sigma0^2 (1 + (D t / sigma0^2)^2)
  const Grid g(1024, 40.0);
  const double sigma0 = 1.0, k0 = 1.5, t = 0.5;
  const auto s0 = gaussian(g, 12.0, sigma0, k0);
  const BarrierSchedule free(EmbeddedPotential(std::monostate{}, 0.0, 40.0));
  const auto tr = run(s0, free, 1e-3, 500, 500);
  const WaveState& s = *tr.final_state;
  double mean = 0.0, var = 0.0;
  for (std::size_t i = 0; i < g.n_points(); ++i) mean += g.x(i) * std::norm(s.amplitudes[i]) * g.spacing();
  for (std::size_t i = 0; i < g.n_points(); ++i) {
    var += std::pow(g.x(i) - mean, 2) * std::norm(s.amplitudes[i]) * g.spacing();
  }
  const double D = 2 * pi;
  CHECK(mean == Approx(12.0 + 2 * D * k0 * t).epsilon(1e-6));
  CHECK(var == Approx(sigma0 * sigma0 * (1 + std::pow(D * t / (sigma0 * sigma0), 2))).epsilon(1e-6));
  CHECK(std::abs(norm(s) - 1.0) < 1e-10);
}

TEST_CASE("norm is conserved over 1e4 steps") {
  const auto p = harmonic();
  const Grid g(512, p.length());
  const auto tr = run(gaussian(g, 4.0, 0.4, 2.0), BarrierSchedule(p), 1e-4, 10000, 1000);
  for (double n : tr.norm_series) CHECK(std::abs(n - 1.0) < 1e-9);
  CHECK(tr.times.back() == Approx(1.0));
  CHECK(tr.times.size() == 11);
}

TEST_CASE("eigenstates pick up the phase -2 pi E tau") {
  const auto p = harmonic();
  const auto sol = solve_bound_states(p, {200, p.length()});
  const Grid g(512, p.length());
  for (std::size_t n : {0, 1, 4}) {
    const WaveState s0 = reconstruct_wavefunction(sol, n, g);
    const double tau = 1.0;
    const auto tr = run(s0, BarrierSchedule(p), 1e-4, 10000, 10000);
    const cplx ov = overlap(s0, *tr.final_state) / overlap(s0, s0);
    CHECK(std::abs(ov) == Approx(1.0).epsilon(1e-6));
    // unwrap against the expected phase
    const double expected = -2 * pi * sol.energies[n] * tau;
    const double diff = std::remainder(std::arg(ov) - expected, 2 * pi);
    CHECK(std::abs(diff) / tau < 1e-4);
  }
}

TEST_CASE("energy is conserved for a static potential") {
  const auto p = harmonic();
  const Grid g(512, p.length());
  const auto s0 = gaussian(g, 4.0, 0.5, 1.0);
  const double e0 = energy_expectation(s0, p).value;
  const auto tr = run(s0, BarrierSchedule(p), 1e-4, 100000, 100000);
  const double e1 = energy_expectation(*tr.final_state, p).value;
  CHECK(std::abs(e1 - e0) / std::abs(e0) < 1e-6);
}

TEST_CASE("time reversal returns the initial state") {
  const auto p = harmonic();
  const Grid g(512, p.length());
  const auto s0 = gaussian(g, 4.0, 0.5, 1.0);
  const auto fwd = run(s0, BarrierSchedule(p), 1e-4, 2000, 2000);
  const auto back = run(*fwd.final_state, BarrierSchedule(p), -1e-4, 2000, 2000);
  CHECK(l2_distance(*back.final_state, s0) < 1e-8);
  CHECK(back.final_state->time == Approx(0.0).scale(1.0));
}

TEST_CASE("second-order global accuracy") {
  const auto p = harmonic();
  const Grid g(512, p.length());
  const auto s0 = gaussian(g, 4.0, 0.5, 1.0);
  const BarrierSchedule sched(p);
  const double T = 0.2;
  const auto ref = run(s0, sched, T / 3200, 3200, 3200);
  const double e1 = l2_distance(*run(s0, sched, T / 100, 100, 100).final_state, *ref.final_state);
  const double e2 = l2_distance(*run(s0, sched, T / 200, 200, 200).final_state, *ref.final_state);
  CHECK(e1 / e2 == Approx(4.0).epsilon(0.1));
}

TEST_CASE("steps are split at barrier switches") {
  // a switch inside a step must give the same state as stepping exactly to it
  const auto pw = PiecewisePotential::constant({0, 1, 3, 3.5, 5.5, 6.5}, {100, 0, 20, 0, 100});
  const EmbeddedPotential base(pw, 0.0, 6.5);
  const BarrierSchedule sched(base, {{2, rectangular_pulse(20.0, 5.0, 0.00123, 0.01)}});
  const Grid g(256, 6.5);
  const auto s0 = gaussian(g, 2.0, 0.4, 0.0);
  const auto coarse = run(s0, sched, 1e-3, 20, 20);
  SplitOperator op(g, PropagationMode::real_time, 200.0);
  WaveState s = s0;
  double t = 0.0;
  for (double edge : {0.00123, 0.01123, 0.02}) {
    const double stop = edge;
    while (t < stop - 1e-15) {
      const double next = std::min(stop, std::floor(t / 1e-3 + 1.0 + 1e-9) * 1e-3);
      op.step(s, sched, t, next - t);
      t = next;
    }
  }
  CHECK(l2_distance(s, *coarse.final_state) < 1e-12);
}

TEST_CASE("imaginary time finds ground states") {
  PropagatorConfig c;
  c.mode = PropagationMode::imaginary_time;
  c.dt = 1e-3;
  c.n_steps = 200000;
  c.record_stride = 10;

  SUBCASE("free infinite well") {
    const EmbeddedPotential empty(std::monostate{}, 0.0, 4.0);
    const Grid g(256, 4.0);
    const auto s = ground_state_imaginary_time(empty, g, c);
    CHECK(energy_expectation(s, empty).value == Approx(std::pow(pi / 4.0, 2)).epsilon(1e-5));
    CHECK(norm(s) == Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("harmonic-like well matches the eigensolver") {
    const auto p = harmonic();
    const auto sol = solve_bound_states(p, {200, p.length()});
    const auto s = ground_state_imaginary_time(p, Grid(512, p.length()), c);
    CHECK(energy_expectation(s, p).value == Approx(sol.energies[0]).epsilon(1e-4).scale(1.0));
  }
  SUBCASE("double well relaxes to the symmetric state") {
    const auto pw = PiecewisePotential::constant({0, 1, 3, 3.5, 5.5, 6.5}, {100, 0, 15, 0, 100});
    const EmbeddedPotential p(pw, 0.0, 6.5);
    const Grid g(512, 6.5);
    // start fully in the left dot
    WaveState guess = WaveState::zeros(g);
    for (std::size_t i = 0; i < g.n_points(); ++i) {
      if (g.x(i) > 1.0 && g.x(i) < 3.0) guess.amplitudes[i] = 1.0;
    }
    const auto s = ground_state_imaginary_time(p, g, c, 1e-10, guess);
    const std::vector<Interval> dots{{0, 3.25}, {3.25, 6.5}};
    const auto probs = dot_probabilities(s, dots);
    CHECK(probs[0] == Approx(0.5).epsilon(1e-3));
    CHECK(probs[1] == Approx(0.5).epsilon(1e-3));
  }
  SUBCASE("too few steps raise a convergence error") {
    c.n_steps = 20;
    try {
      ground_state_imaginary_time(harmonic(), Grid(256, 10.0), c);
      FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
      CHECK(e.last_energy() > 0.0);
    }
  }
  SUBCASE("real-time config is rejected") {
    c.mode = PropagationMode::real_time;
    CHECK_THROWS_AS(ground_state_imaginary_time(harmonic(), Grid(256, 10.0), c), InvalidArgument);
  }
}

TEST_CASE("oscillation period from mean crossings") {
  std::vector<double> t, v;
  for (int i = 0; i < 5000; ++i) {
    t.push_back(0.01 * i);
    v.push_back(std::sin(2 * pi * t.back() / 7.3 + 0.4));
  }
  CHECK(oscillation_period(t, v) == Approx(7.3).epsilon(1e-4));
  CHECK(oscillation_period(std::vector<double>{0, 1}, std::vector<double>{0, 1}) == 0.0);
}

TEST_CASE("input checks") {
  const Grid g(64, 1.0);
  PropagatorConfig c;
  c.dt = 0.0;
  CHECK_THROWS_AS(evolve(WaveState::zeros(g), BarrierSchedule(EmbeddedPotential(std::monostate{}, 0, 1)), c, {}),
                  InvalidArgument);
  SplitOperator op(g, PropagationMode::real_time, 200.0);
  WaveState other = WaveState::zeros(Grid(128, 1.0));
  CHECK_THROWS_AS(op.step(other, BarrierSchedule(EmbeddedPotential(std::monostate{}, 0, 1)), 0.0, 1e-3),
                  InvalidArgument);
}
