#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "qdsim/potential.hpp"
#include "qdsim/splitop.hpp"

namespace qdsim {

/// Two-level random telegraph process with exponential dwell times.
struct TelegraphModel {
  double v_min = 4.0;       // E0
  double v_max = 5.0;       // E0
  double mean_dwell = 1.0;  // t0
  std::uint64_t seed = 0;
  bool start_high = false;
};

/// Level sequence on [0, horizon); reproducible for a given seed.
StepFunction telegraph_trajectory(const TelegraphModel& model, double horizon);

/// Deterministic, well-mixed per-run seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

struct ConfidenceInterval {
  double mean = 0.0;
  double half_width = 0.0;
};

/// mean +/- t_{(1+c)/2, n-1} s / sqrt(n).
ConfidenceInterval student_ci(std::span<const double> samples, double confidence = 0.95);

struct EnsembleTrace {
  std::vector<double> times;
  std::vector<std::vector<double>> mean_probs;     // [time][dot]
  std::vector<std::vector<double>> ci_half_width;  // [time][dot]
  std::size_t n_runs = 0;
  std::vector<std::uint64_t> per_run_seeds;
};

/// One realization: recorded times and dot probabilities for a given seed.
struct RunResult {
  std::vector<double> times;
  std::vector<std::vector<double>> probs;  // [time][dot]
};
using RunFunction = std::function<RunResult(std::uint64_t seed)>;

/// Runs `run` for n_runs derived seeds on up to `threads` workers (0: hardware
/// concurrency) and reduces in run order.
EnsembleTrace ensemble_aggregate(const RunFunction& run, std::size_t n_runs, std::uint64_t master_seed,
                                 std::size_t threads = 0, double confidence = 0.95);

/// SOM evolution whose `noisy_segment` barrier follows a telegraph trajectory.
struct DecoherenceScenario {
  EmbeddedPotential base;
  std::size_t noisy_segment = 0;
  WaveState initial;
  PropagatorConfig config;
  std::vector<Interval> dots;
};

/// model.seed is the master seed.
EnsembleTrace ensemble_run(const DecoherenceScenario& scenario, const TelegraphModel& model, std::size_t n_runs,
                           std::size_t threads = 0);

/// Conservative oscillation amplitudes of one dot's ensemble mean: the lower
/// bound over the first quarter of the records and the upper bound over the
/// last quarter, both from the confidence band.
struct DecayAmplitudes {
  double first_quarter_lower = 0.0;
  double last_quarter_upper = 0.0;
  bool decays() const { return first_quarter_lower > last_quarter_upper; }
};
DecayAmplitudes decay_amplitudes(const EnsembleTrace& trace, std::size_t dot);

/// `t,mean_p1..pN,ci_p1..pN`
void write_ensemble_csv(std::ostream& out, const EnsembleTrace& trace);

}  // namespace qdsim
