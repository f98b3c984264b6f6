#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "qdsim/errors.hpp"
#include "qdsim/noise.hpp"
#include "qdsim/tightbinding.hpp"

using namespace qdsim;
using doctest::Approx;

TEST_CASE("switch counts follow Poisson statistics") {
  const double horizon = 3.0, dwell = 1.5;
  const int n = 10000;
  double sum = 0.0;
  for (int s = 0; s < n; ++s) {
    const TelegraphModel m{4.0, 5.0, dwell, derive_seed(99, s), false};
    sum += static_cast<double>(telegraph_trajectory(m, horizon).switch_count());
  }
  const double lambda = horizon / dwell;
  const double sigma = std::sqrt(lambda / n);
  CHECK(std::abs(sum / n - lambda) < 3 * sigma);

  // dwell much longer than the horizon: almost never a switch
  int zero = 0;
  for (int s = 0; s < 1000; ++s) {
    if (telegraph_trajectory({4.0, 5.0, 1e4, static_cast<std::uint64_t>(s), false}, 1.0).switch_count() == 0) ++zero;
  }
  CHECK(zero >= 995);
}

TEST_CASE("mean dwell time over 1e5 intervals") {
  const TelegraphModel m{4.0, 5.0, 0.3, 1234, false};
  const auto f = telegraph_trajectory(m, 0.3 * 100500);
  REQUIRE(f.switch_count() > 100000);
  const auto& sw = f.switches();
  const double mean = sw.back().first / static_cast<double>(sw.size());
  CHECK(mean == Approx(0.3).epsilon(0.01));
  // levels alternate, starting low
  CHECK(f.initial() == 4.0);
  for (std::size_t i = 0; i < 10; ++i) CHECK(sw[i].second == (i % 2 == 0 ? 5.0 : 4.0));
}

TEST_CASE("trajectories: determinism and degenerate levels") {
  const TelegraphModel m{4.0, 5.0, 0.2, 42, true};
  const auto a = telegraph_trajectory(m, 10.0);
  const auto b = telegraph_trajectory(m, 10.0);
  CHECK(a.switches() == b.switches());
  CHECK(a.initial() == 5.0);
  const auto flat = telegraph_trajectory({3.0, 3.0, 0.2, 1, false}, 10.0);
  for (double t = 0.0; t < 10.0; t += 0.01) CHECK(flat.value_at(t) == 3.0);
  CHECK_THROWS_AS(telegraph_trajectory({5.0, 4.0, 0.2, 1, false}, 1.0), InvalidArgument);
  CHECK_THROWS_AS(telegraph_trajectory({4.0, 5.0, 0.0, 1, false}, 1.0), InvalidArgument);
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  CHECK(derive_seed(7, 3) == derive_seed(7, 3));
}

TEST_CASE("Student-t confidence intervals") {
  const std::vector<double> two{0.0, 1.0};
  const auto c = student_ci(two);
  CHECK(c.mean == 0.5);
  CHECK(c.half_width == Approx(12.706 * 0.70710678 / 1.41421356).epsilon(1e-4));
  const std::vector<double> same(10, 0.3);
  CHECK(student_ci(same).half_width < 1e-12);
  CHECK_THROWS_AS(student_ci(std::vector<double>{1.0}), InvalidArgument);

  std::mt19937_64 rng(17);
  std::normal_distribution<double> nd;
  std::vector<double> big(20000);
  for (double& x : big) x = nd(rng);
  const auto w = student_ci(big);
  // sample sd is within ~0.5% of 1 at this size
  CHECK(w.half_width == Approx(1.96 / std::sqrt(20000.0)).epsilon(0.05));
}

TEST_CASE("noiseless ensemble equals the analytic Rabi curve") {
  const double th = 0.25;
  const RunFunction run = [th](std::uint64_t) {
    Eigen::VectorXcd c0(2);
    c0 << 1.0, 0.0;
    const auto tr = propagate(c0, TBSchedule(2, th), 4.0, 0.05);
    RunResult r;
    r.times = tr.times;
    for (std::size_t i = 0; i < tr.times.size(); ++i) r.probs.push_back(tr.probabilities(i));
    return r;
  };
  const auto e = ensemble_aggregate(run, 10, 3, 2);
  CHECK(e.n_runs == 10);
  CHECK(e.per_run_seeds.size() == 10);
  for (std::size_t i = 0; i < e.times.size(); ++i) {
    const double want = std::pow(std::sin(2 * std::numbers::pi * th * e.times[i]), 2);
    CHECK(e.mean_probs[i][1] == Approx(want).epsilon(1e-6).scale(1.0));
    CHECK(e.ci_half_width[i][1] == Approx(0.0).epsilon(1e-12).scale(1.0));
  }
  CHECK_THROWS_AS(ensemble_aggregate(run, 1, 3), InvalidArgument);
}

TEST_CASE("ensembles are deterministic regardless of thread count") {
  const RunFunction run = [](std::uint64_t seed) {
    const auto f = telegraph_trajectory({0.0, 1.0, 0.5, seed, false}, 10.0);
    RunResult r;
    for (int i = 0; i < 50; ++i) {
      r.times.push_back(0.2 * i);
      r.probs.push_back({f.value_at(0.2 * i)});
    }
    return r;
  };
  const auto a = ensemble_aggregate(run, 40, 11, 1);
  const auto b = ensemble_aggregate(run, 40, 11, 4);
  CHECK(a.mean_probs == b.mean_probs);
  CHECK(a.ci_half_width == b.ci_half_width);
  CHECK(a.per_run_seeds == b.per_run_seeds);
  for (const auto& row : a.ci_half_width) CHECK(row[0] >= 0.0);
  for (const auto& row : a.mean_probs) CHECK((row[0] >= 0.0 && row[0] <= 1.0));
  const RunFunction bad = [](std::uint64_t seed) -> RunResult {
    if (seed % 3 == 0) throw NumericError("boom");
    return {{0.0}, {{0.0}}};
  };
  CHECK_THROWS(ensemble_aggregate(bad, 40, 11, 2));
}

TEST_CASE("decay amplitudes and CSV") {
  EnsembleTrace e;
  e.n_runs = 2;
  for (int i = 0; i < 400; ++i) {
    const double t = 0.05 * i;
    e.times.push_back(t);
    const double p = 0.5 + 0.5 * std::exp(-t / 5.0) * std::cos(t);
    e.mean_probs.push_back({p});
    e.ci_half_width.push_back({0.02});
  }
  const auto d = decay_amplitudes(e, 0);
  CHECK(d.decays());
  CHECK(d.first_quarter_lower > 0.3);
  CHECK(d.last_quarter_upper < 0.1);

  // flat mean with a wide band never counts as decaying
  for (auto& c : e.ci_half_width) c[0] = 0.6;
  CHECK_FALSE(decay_amplitudes(e, 0).decays());

  std::ostringstream out;
  write_ensemble_csv(out, e);
  CHECK(out.str().rfind("t,mean_p1,ci_p1\n", 0) == 0);
}
