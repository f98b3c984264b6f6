#include "qdsim/noise.hpp"

#include <algorithm>
#include <atomic>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <exception>
#include <mutex>
#include <ostream>
#include <random>
#include <thread>

#include "qdsim/errors.hpp"

namespace qdsim {

StepFunction telegraph_trajectory(const TelegraphModel& model, double horizon) {
  if (!(horizon > 0)) throw InvalidArgument("telegraph horizon must be positive");
  if (!(model.mean_dwell > 0)) throw InvalidArgument("mean dwell time must be positive");
  if (!(model.v_max >= model.v_min)) throw InvalidArgument("telegraph levels need v_max >= v_min");
  std::mt19937_64 rng(model.seed);
  std::exponential_distribution<double> dwell(1.0 / model.mean_dwell);
  bool high = model.start_high;
  std::vector<std::pair<double, double>> switches;
  double t = dwell(rng);
  while (t < horizon) {
    high = !high;
    switches.emplace_back(t, high ? model.v_max : model.v_min);
    t += dwell(rng);
  }
  return StepFunction(model.start_high ? model.v_max : model.v_min, std::move(switches));
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  // splitmix64 finalizer over a combination of both inputs.
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

ConfidenceInterval student_ci(std::span<const double> samples, double confidence) {
  const std::size_t n = samples.size();
  if (n < 2) throw InvalidArgument("confidence interval needs at least 2 samples");
  if (!(confidence > 0 && confidence < 1)) throw InvalidArgument("confidence must be in (0, 1)");
  double mean = 0.0;
  for (double s : samples) mean += s;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double s : samples) ss += (s - mean) * (s - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  const boost::math::students_t dist(static_cast<double>(n - 1));
  const double tq = boost::math::quantile(boost::math::complement(dist, 0.5 * (1.0 - confidence)));
  return {mean, tq * sd / std::sqrt(static_cast<double>(n))};
}

EnsembleTrace ensemble_aggregate(const RunFunction& run, std::size_t n_runs, std::uint64_t master_seed,
                                 std::size_t threads, double confidence) {
  if (n_runs < 2) throw InvalidArgument("an ensemble needs at least 2 runs");
  EnsembleTrace out;
  out.n_runs = n_runs;
  for (std::size_t i = 0; i < n_runs; ++i) out.per_run_seeds.push_back(derive_seed(master_seed, i));

  std::vector<RunResult> results(n_runs);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&]() {
    for (std::size_t i = next++; i < n_runs; i = next++) {
      try {
        results[i] = run(out.per_run_seeds[i]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::size_t n_threads = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  n_threads = std::min(n_threads, n_runs);
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  out.times = results.front().times;
  for (const RunResult& r : results) {
    if (r.times.size() != out.times.size() || r.probs.size() != out.times.size()) {
      throw NumericError("ensemble runs recorded different time grids");
    }
  }
  const std::size_t n_dots = out.times.empty() ? 0 : results.front().probs.front().size();
  std::vector<double> samples(n_runs);
  for (std::size_t t = 0; t < out.times.size(); ++t) {
    std::vector<double> mean(n_dots);
    std::vector<double> ci(n_dots);
    for (std::size_t d = 0; d < n_dots; ++d) {
      for (std::size_t r = 0; r < n_runs; ++r) samples[r] = results[r].probs[t].at(d);
      const auto c = student_ci(samples, confidence);
      mean[d] = c.mean;
      ci[d] = c.half_width;
    }
    out.mean_probs.push_back(std::move(mean));
    out.ci_half_width.push_back(std::move(ci));
  }
  return out;
}

EnsembleTrace ensemble_run(const DecoherenceScenario& scenario, const TelegraphModel& model, std::size_t n_runs,
                           std::size_t threads) {
  const double horizon = std::abs(scenario.config.dt) * static_cast<double>(scenario.config.n_steps);
  if (!(horizon > 0)) throw InvalidArgument("decoherence scenario needs a positive horizon");
  RunFunction run = [&](std::uint64_t seed) {
    TelegraphModel m = model;
    m.seed = seed;
    const BarrierSchedule schedule(scenario.base, {Modulation{scenario.noisy_segment, telegraph_trajectory(m, horizon)}});
    EvolutionTrace tr = evolve(scenario.initial, schedule, scenario.config, scenario.dots);
    return RunResult{std::move(tr.times), std::move(tr.dot_probs)};
  };
  return ensemble_aggregate(run, n_runs, model.seed, threads);
}

DecayAmplitudes decay_amplitudes(const EnsembleTrace& trace, std::size_t dot) {
  const std::size_t n = trace.times.size();
  if (n < 8) throw InvalidArgument("too few records to compare quarters");
  auto band = [&](std::size_t from, std::size_t to, bool lower) {
    double hi_of_low = -1e300;
    double lo_of_high = 1e300;
    double hi_of_high = -1e300;
    double lo_of_low = 1e300;
    for (std::size_t i = from; i < to; ++i) {
      const double m = trace.mean_probs[i].at(dot);
      const double c = trace.ci_half_width[i].at(dot);
      hi_of_low = std::max(hi_of_low, m - c);
      lo_of_high = std::min(lo_of_high, m + c);
      hi_of_high = std::max(hi_of_high, m + c);
      lo_of_low = std::min(lo_of_low, m - c);
    }
    return lower ? std::max(0.0, 0.5 * (hi_of_low - lo_of_high)) : 0.5 * (hi_of_high - lo_of_low);
  };
  const std::size_t q = n / 4;
  return {band(0, q, true), band(n - q, n, false)};
}

void write_ensemble_csv(std::ostream& out, const EnsembleTrace& trace) {
  const std::size_t n = trace.mean_probs.empty() ? 0 : trace.mean_probs.front().size();
  out << 't';
  for (std::size_t i = 1; i <= n; ++i) out << ",mean_p" << i;
  for (std::size_t i = 1; i <= n; ++i) out << ",ci_p" << i;
  out << '\n';
  out.precision(12);
  for (std::size_t r = 0; r < trace.times.size(); ++r) {
    out << trace.times[r];
    for (double m : trace.mean_probs[r]) out << ',' << m;
    for (double c : trace.ci_half_width[r]) out << ',' << c;
    out << '\n';
  }
}

}  // namespace qdsim
