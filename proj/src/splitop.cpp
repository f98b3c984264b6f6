#include "qdsim/splitop.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "qdsim/errors.hpp"
#include "qdsim/units.hpp"

namespace qdsim {

namespace {

// exp(-i H dt / hbar) with hbar = 1/(2 pi) in E0, t0 units.
constexpr double kTwoPi = 2.0 * std::numbers::pi;

cplx propagator_factor(double energy, double dt, PropagationMode mode) {
  if (mode == PropagationMode::imaginary_time) return {std::exp(-kTwoPi * energy * dt), 0.0};
  return std::polar(1.0, -kTwoPi * energy * dt);
}

// Plain complex product; std::complex operator* adds NaN recovery that is slow here.
inline cplx mul(const cplx& a, const cplx& b) {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

void record(EvolutionTrace& trace, const WaveState& s, std::span<const Interval> dots, bool snapshots) {
  trace.times.push_back(s.time);
  trace.dot_probs.push_back(dot_probabilities(s, dots));
  trace.norm_series.push_back(norm(s));
  if (snapshots) trace.snapshots.push_back(density(s));
}

}  // namespace

SplitOperator::SplitOperator(const Grid& grid, PropagationMode mode, double wall_height)
    : grid_(grid), mode_(mode), wall_height_(wall_height), fft_(grid) {
  half_potential_.resize(grid.n_points());
  kinetic_.resize(fft_.extended_size());
}

void SplitOperator::refresh(const BarrierSchedule& potential, double t_mid, double dt) {
  potential.heights_at(t_mid, heights_);
  if (!valid_ || heights_ != cached_heights_ || dt != cached_dt_) {
    const auto v = sample_on_grid(potential.at(t_mid), grid_, wall_height_);
    for (std::size_t i = 0; i < v.size(); ++i) half_potential_[i] = propagator_factor(v[i], 0.5 * dt, mode_);
    cached_heights_ = heights_;
    cached_dt_ = dt;
    valid_ = true;
  }
  if (dt != cached_kinetic_dt_) {
    const auto& k = fft_.wavenumbers();
    for (std::size_t j = 0; j < k.size(); ++j) kinetic_[j] = propagator_factor(k[j] * k[j], dt, mode_);
    cached_kinetic_dt_ = dt;
  }
}

void SplitOperator::step(WaveState& state, const BarrierSchedule& potential, double t, double dt) {
  if (!(state.grid == grid_)) throw InvalidArgument("state grid differs from propagator grid");
  refresh(potential, t + 0.5 * dt, dt);
  auto& psi = state.amplitudes;
  for (std::size_t i = 0; i < psi.size(); ++i) psi[i] = mul(psi[i], half_potential_[i]);
  fft_.load(psi);
  fft_.forward();
  auto buf = fft_.buffer();
  for (std::size_t j = 0; j < buf.size(); ++j) buf[j] = mul(buf[j], kinetic_[j]);
  fft_.backward();
  fft_.store(psi);
  for (std::size_t i = 0; i < psi.size(); ++i) psi[i] = mul(psi[i], half_potential_[i]);
  state.time = t + dt;
}

WaveState som_step(const WaveState& state, const BarrierSchedule& potential, double t, double dt,
                   double wall_height) {
  SplitOperator op(state.grid, PropagationMode::real_time, wall_height);
  WaveState out = state;
  op.step(out, potential, t, dt);
  return out;
}

EvolutionTrace evolve(WaveState state, const BarrierSchedule& schedule, const PropagatorConfig& config,
                      std::span<const Interval> dots) {
  if (config.dt == 0.0 || !std::isfinite(config.dt)) throw InvalidArgument("time step must be nonzero");
  if (config.record_stride < 1) throw InvalidArgument("record stride must be at least 1");
  SplitOperator op(state.grid, config.mode, config.wall_height);
  EvolutionTrace trace;
  const double t0 = state.time;
  record(trace, state, dots, config.keep_snapshots);
  const double t_end = t0 + static_cast<double>(config.n_steps) * config.dt;
  const auto switches = schedule.switch_times_in(std::min(t0, t_end), std::max(t0, t_end));
  std::vector<double> cuts;
  for (std::size_t n = 0; n < config.n_steps; ++n) {
    const double ta = t0 + static_cast<double>(n) * config.dt;
    const double tb = t0 + static_cast<double>(n + 1) * config.dt;
    cuts.clear();
    auto it = std::upper_bound(switches.begin(), switches.end(), std::min(ta, tb));
    for (; it != switches.end() && *it < std::max(ta, tb); ++it) cuts.push_back(*it);
    if (config.dt < 0) std::reverse(cuts.begin(), cuts.end());
    double t = ta;
    for (double c : cuts) {
      op.step(state, schedule, t, c - t);
      t = c;
    }
    // uncut steps use config.dt exactly so cached phases stay valid
    op.step(state, schedule, t, cuts.empty() ? config.dt : tb - t);
    state.time = tb;
    if (config.mode == PropagationMode::imaginary_time) normalize(state);
    if ((n + 1) % config.record_stride == 0) record(trace, state, dots, config.keep_snapshots);
  }
  trace.final_state = std::move(state);
  return trace;
}

WaveState ground_state_imaginary_time(const EmbeddedPotential& potential, const Grid& grid,
                                      const PropagatorConfig& config, double tol, std::optional<WaveState> guess) {
  if (config.mode != PropagationMode::imaginary_time) throw InvalidArgument("imaginary-time mode required");
  if (!(config.dt > 0)) throw InvalidArgument("time step must be positive");
  if (config.record_stride < 1) throw InvalidArgument("record stride must be at least 1");
  WaveState state = guess ? std::move(*guess) : WaveState::zeros(grid);
  if (!guess) {
    for (std::size_t i = 1; i < grid.n_points(); ++i) {
      const double x = grid.x(i);
      if (x > 0.0 && x < potential.length()) state.amplitudes[i] = 1.0;
    }
  }
  normalize(state);
  const BarrierSchedule schedule(potential);
  const auto v = sample_on_grid(potential, state.grid, config.wall_height);
  SplitOperator op(state.grid, PropagationMode::imaginary_time, config.wall_height);
  double energy = energy_expectation(state, v).value;
  for (std::size_t n = 0; n < config.n_steps; ++n) {
    op.step(state, schedule, 0.0, config.dt);
    normalize(state);
    if ((n + 1) % config.record_stride == 0) {
      const double next = energy_expectation(state, v).value;
      const double change = std::abs(next - energy) / std::max(std::abs(next), 1e-300);
      energy = next;
      if (change < tol) {
        state.time = 0.0;
        return state;
      }
    }
  }
  throw ConvergenceError(energy, config.n_steps);
}

double oscillation_period(std::span<const double> times, std::span<const double> values) {
  if (times.size() != values.size() || times.size() < 3) return 0.0;
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  std::vector<double> ups;
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    if (values[i] < mean && values[i + 1] >= mean) {
      const double f = (mean - values[i]) / (values[i + 1] - values[i]);
      ups.push_back(times[i] + f * (times[i + 1] - times[i]));
    }
  }
  if (ups.size() < 2) return 0.0;
  return (ups.back() - ups.front()) / static_cast<double>(ups.size() - 1);
}

}  // namespace qdsim
