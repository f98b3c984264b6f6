#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "qdsim/potential.hpp"
#include "qdsim/spectral.hpp"
#include "qdsim/wavefunction.hpp"

namespace qdsim {

enum class PropagationMode { real_time, imaginary_time };

struct PropagatorConfig {
  double dt = 1e-4;  // t0 units; negative runs real time backwards
  std::size_t n_steps = 0;
  std::size_t record_stride = 1;
  PropagationMode mode = PropagationMode::real_time;
  double wall_height = 200.0;  // grid points outside [0, L]
  bool keep_snapshots = false;
};

struct EvolutionTrace {
  std::vector<double> times;
  std::vector<std::vector<double>> dot_probs;  // [record][dot]
  std::vector<double> norm_series;
  std::vector<std::vector<double>> snapshots;  // |psi|^2 per record, if requested
  std::optional<WaveState> final_state;
};

/// Strang-split propagator V/2 - K - V/2 on one grid. Keeps the FFT buffers
/// and reuses phase factors while the barrier heights and step size repeat.
class SplitOperator {
 public:
  SplitOperator(const Grid& grid, PropagationMode mode, double wall_height);

  /// Advances `state` from t to t + dt with V taken at t + dt/2.
  void step(WaveState& state, const BarrierSchedule& potential, double t, double dt);

 private:
  void refresh(const BarrierSchedule& potential, double t_mid, double dt);

  Grid grid_;
  PropagationMode mode_;
  double wall_height_;
  SineTransform fft_;
  std::vector<cplx> half_potential_;
  std::vector<cplx> kinetic_;
  std::vector<double> cached_heights_;
  std::vector<double> heights_;
  double cached_dt_ = 0.0;
  double cached_kinetic_dt_ = 0.0;
  bool valid_ = false;
};

/// One symmetric split step.
WaveState som_step(const WaveState& state, const BarrierSchedule& potential, double t, double dt,
                   double wall_height = 200.0);

/// config.n_steps steps starting at state.time. Steps that contain a barrier
/// switch are split at the switch. Records at step 0 and every record_stride.
EvolutionTrace evolve(WaveState state, const BarrierSchedule& schedule, const PropagatorConfig& config,
                      std::span<const Interval> dots);

/// Imaginary-time relaxation with renormalization after every step. Stops when
/// the relative energy change between recorded strides drops below `tol`.
/// The default guess is uniform inside the walls.
WaveState ground_state_imaginary_time(const EmbeddedPotential& potential, const Grid& grid,
                                      const PropagatorConfig& config, double tol = 1e-10,
                                      std::optional<WaveState> guess = std::nullopt);

/// Mean spacing of upward crossings of the series mean (linear interpolation);
/// zero with fewer than two crossings.
double oscillation_period(std::span<const double> times, std::span<const double> values);

}  // namespace qdsim
