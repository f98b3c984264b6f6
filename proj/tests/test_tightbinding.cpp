#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "qdsim/errors.hpp"
#include "qdsim/tightbinding.hpp"
#include "qdsim/units.hpp"

using namespace qdsim;
using doctest::Approx;

namespace {

Eigen::VectorXcd site(std::size_t n, std::size_t i) {
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(n));
  c(static_cast<Eigen::Index>(i)) = 1.0;
  return c;
}

}  // namespace

TEST_CASE("two-site Rabi oscillation is sin^2(2 pi t tau)") {
  const double th = 0.37;
  const auto tr = propagate(site(2, 0), TBSchedule(2, th), 10.0, 0.013);
  for (std::size_t r = 0; r < tr.times.size(); ++r) {
    const double want = std::pow(std::sin(2 * oracle::pi * th * tr.times[r]), 2);
    CHECK(tr.probabilities(r)[1] == Approx(want).epsilon(1e-12).scale(1.0));
    CHECK(tr.amplitudes[r].norm() == Approx(1.0).epsilon(1e-12));
  }
  CHECK(tr.times.back() == 10.0);
  CHECK(rabi_period(th) == Approx(1.0 / (2 * th)));
}

TEST_CASE("pulsed chains agree with an RK4 oracle") {
  std::vector<Pulse> pulses{{0, 1, 0.01, 0.8, 0.5, 0.7}, {1, 2, 0.02, 1.3, 1.1, 0.45}, {0, 1, 0.01, 0.5, 2.0, 0.3}};
  const TBSchedule sched(3, std::vector<double>{0.01, 0.02}, pulses);
  Eigen::VectorXcd c0(3);
  c0 << std::complex<double>(0.6, 0.1), std::complex<double>(0.0, -0.5), 0.2;
  c0.normalize();
  const double horizon = 3.0;
  const auto tr = propagate(c0, sched, horizon, 0.25);

  // the oracle restarts RK4 at every switch so no step straddles a discontinuity
  std::vector<double> cuts{0.0};
  for (double s : sched.switch_times()) cuts.push_back(s);
  cuts.push_back(horizon);
  Eigen::VectorXcd c = c0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const Eigen::MatrixXd h = hamiltonian_at(sched, 0.5 * (cuts[i] + cuts[i + 1]));
    c = oracle::rk4([&h](double) { return h; }, c, cuts[i + 1] - cuts[i], 1e-4);
  }
  CHECK((tr.amplitudes.back() - c).cwiseAbs().maxCoeff() < 1e-6);
  for (const auto& a : tr.amplitudes) CHECK(std::abs(a.norm() - 1.0) < 1e-9);
}

TEST_CASE("gate pulses on an isolated pair") {
  const double t_high = 2.82;
  const double T0 = rabi_period(t_high);
  // T0 = t0 / 5.64; 8.31 ps with this unit system, 8.39 ps with the rounded 47.3 ps t0
  CHECK(T0 == Approx(1.0 / 5.64));
  CHECK(T0 * UnitSystem::standard().t0 * 1e12 == Approx(8.39).epsilon(0.01));

  for (int k : {0, 1, 3}) {
    const double w = gate_pulse_width(GateKind::transport, T0, k);
    CHECK(w == Approx(T0 / 2 + k * T0));
    const TBSchedule s(2, 0.0, {{0, 1, 0.0, t_high, 0.1, w}});
    const auto tr = propagate(site(2, 0), s, 0.2 + w, 0.05);
    CHECK(tr.probabilities(tr.times.size() - 1)[1] >= 1.0 - 1e-9);

    const double q = gate_pulse_width(GateKind::half_split, T0, k);
    const TBSchedule h(2, 0.0, {{0, 1, 0.0, t_high, 0.1, q}});
    const auto hr = propagate(site(2, 0), h, 0.2 + q, 0.05);
    const auto p = hr.probabilities(hr.times.size() - 1);
    CHECK(std::abs(p[0] - 0.5) < 1e-9);
    CHECK(std::abs(p[1] - 0.5) < 1e-9);
  }
  CHECK_THROWS_AS(gate_pulse_width(GateKind::transport, T0, -1), InvalidArgument);
}

TEST_CASE("unitarity under random schedules") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + trial % 5;
    std::vector<double> rest(n - 1);
    for (double& r : rest) r = 0.1 * u(rng);
    std::vector<Pulse> pulses;
    for (std::size_t l = 0; l + 1 < n; ++l) {
      pulses.push_back({l, l + 1, rest[l], rest[l] + 3 * u(rng), 2 * u(rng), 0.1 + u(rng)});
    }
    Eigen::VectorXcd c0 = Eigen::VectorXcd::Random(static_cast<Eigen::Index>(n));
    c0.normalize();
    const auto tr = propagate(c0, TBSchedule(n, rest, pulses), 5.0, 0.01);
    for (const auto& a : tr.amplitudes) CHECK(std::abs(a.norm() - 1.0) < 1e-9);
  }
}

TEST_CASE("schedule validation") {
  CHECK_THROWS_AS(TBSchedule(3, 0.0, {{0, 2, 0, 1, 0, 1}}), InvalidArgument);  // not adjacent
  CHECK_THROWS_AS(TBSchedule(3, 0.0, {{0, 1, 0, 1, 0, 0}}), InvalidArgument);  // zero width
  CHECK_THROWS_AS(TBSchedule(3, 0.5, {{0, 1, 0.5, 0.1, 0, 1}}), InvalidArgument);  // t_high < t_low
  CHECK_THROWS_AS(TBSchedule(3, 0.5, {{0, 1, 0.2, 1, 0, 1}}), InvalidArgument);    // t_low mismatch
  CHECK_THROWS_AS(TBSchedule(3, 0.0, {{0, 1, 0, 1, 0, 1}, {1, 0, 0, 1, 0.5, 1}}), InvalidArgument);  // overlap
  CHECK_NOTHROW(TBSchedule(3, 0.0, {{0, 1, 0, 1, 0, 1}, {0, 1, 0, 2, 1, 1}}));  // touching is fine
  CHECK_NOTHROW(TBSchedule(3, 0.0, {{0, 1, 0, 1, 0, 1}, {1, 2, 0, 1, 0.5, 1}}));  // different links
  CHECK_THROWS_AS(propagate(site(2, 0) * 2.0, TBSchedule(2, 0.1), 1.0, 0.1), InvalidArgument);
  CHECK_THROWS_AS(propagate(site(3, 0), TBSchedule(2, 0.1), 1.0, 0.1), InvalidArgument);

  const TBSchedule s(3, std::vector<double>{0.1, 0.2}, {{1, 2, 0.2, 0.9, 1.0, 0.5}});
  CHECK(hopping_at(s, 1, 2, 0.99) == 0.2);
  CHECK(hopping_at(s, 2, 1, 1.0) == 0.9);
  CHECK(hopping_at(s, 1, 2, 1.5) == 0.9);
  CHECK(hopping_at(s, 0, 1, 1.2) == 0.1);
  const Eigen::MatrixXd h = hamiltonian_at(s, 1.2);
  CHECK(h(1, 2) == -0.9);
  CHECK(h(2, 1) == -0.9);
  CHECK(h(0, 0) == 0.0);
  CHECK(s.switch_times() == std::vector<double>{1.0, 1.5});
}

TEST_CASE("CSV output") {
  const auto tr = propagate(site(3, 0), TBSchedule(3, 0.2), 1.0, 0.5);
  std::ostringstream a, p;
  write_amplitudes_csv(a, tr);
  write_tb_probabilities_csv(p, tr);
  CHECK(a.str().rfind("t,re_c1,im_c1,re_c2,im_c2,re_c3,im_c3\n", 0) == 0);
  CHECK(p.str().rfind("t,p1,p2,p3\n", 0) == 0);
  const std::string text = p.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 4);
}
