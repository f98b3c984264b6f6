#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "qdsim/spline.hpp"
#include "qdsim/units.hpp"
#include "qdsim/wavefunction.hpp"

namespace qdsim {

/// Tabulated potential (x0, E0 units) with cubic interpolation between samples.
class SampledPotential {
 public:
  SampledPotential() = default;
  SampledPotential(std::vector<double> xs, std::vector<double> vs);

  double evaluate(double x) const { return spline_(x); }
  const std::vector<double>& xs() const { return spline_.knots(); }
  const std::vector<double>& vs() const { return spline_.values(); }
  const CubicSpline& spline() const { return spline_; }
  double lo() const { return xs().front(); }
  double hi() const { return xs().back(); }
  double extent() const { return hi() - lo(); }

 private:
  CubicSpline spline_;
};

enum class SegmentShape { constant, linear };

/// Contiguous segments [b_i, b_{i+1}) with a constant or linear profile each.
/// Evaluation is right-continuous at breakpoints; the last segment is closed.
class PiecewisePotential {
 public:
  PiecewisePotential() = default;
  static PiecewisePotential constant(std::vector<double> breakpoints, std::vector<double> values);
  static PiecewisePotential linear(std::vector<double> breakpoints, std::vector<double> start_values,
                                   std::vector<double> end_values);

  std::size_t segments() const { return start_.size(); }
  SegmentShape shape() const { return shape_; }
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  double start_value(std::size_t i) const { return start_[i]; }
  double end_value(std::size_t i) const { return end_[i]; }
  /// Height used when a segment acts as a barrier: the larger end value.
  double height(std::size_t i) const;
  std::size_t segment_at(double x) const;
  double evaluate(double x) const;
  double lo() const { return breakpoints_.front(); }
  double hi() const { return breakpoints_.back(); }
  double extent() const { return hi() - lo(); }

  /// Copy with segment i shifted by a constant.
  PiecewisePotential shifted(std::size_t i, double delta) const;

  /// Interior segments higher than both neighbours, left to right.
  std::vector<std::size_t> barrier_segments() const;

 private:
  PiecewisePotential(std::vector<double> b, std::vector<double> s, std::vector<double> e, SegmentShape shape);

  std::vector<double> breakpoints_;
  std::vector<double> start_;
  std::vector<double> end_;
  SegmentShape shape_ = SegmentShape::constant;
};

using InnerPotential = std::variant<std::monostate, SampledPotential, PiecewisePotential>;

/// Inner potential centred inside an infinite well [0, L]. Between the wall and
/// the inner potential the end values of the inner potential continue as flat
/// plateaus.
class EmbeddedPotential {
 public:
  EmbeddedPotential() = default;
  EmbeddedPotential(InnerPotential inner, double margin_h, double total_length);

  const InnerPotential& inner() const { return inner_; }
  double margin() const { return margin_h_; }
  double length() const { return length_; }
  bool empty() const { return std::holds_alternative<std::monostate>(inner_); }
  /// Embedded-frame interval occupied by the inner potential.
  double inner_start() const { return inner_start_; }
  double inner_end() const { return inner_start_ + inner_extent(); }
  double inner_extent() const;
  /// Offset that maps inner coordinates u to embedded coordinates x = u + shift.
  double shift() const;
  double left_plateau() const;
  double right_plateau() const;

  /// +infinity outside [0, L].
  double evaluate(double x) const;

 private:
  InnerPotential inner_;
  double margin_h_ = 0.0;
  double length_ = 0.0;
  double inner_start_ = 0.0;
};

/// Right-continuous piecewise-constant function of time.
class StepFunction {
 public:
  StepFunction() = default;
  explicit StepFunction(double initial) : initial_(initial) {}
  StepFunction(double initial, std::vector<std::pair<double, double>> switches);

  double value_at(double t) const;
  double initial() const { return initial_; }
  const std::vector<std::pair<double, double>>& switches() const { return switches_; }
  std::size_t switch_count() const { return switches_.size(); }

 private:
  double initial_ = 0.0;
  std::vector<std::pair<double, double>> switches_;  // (time, value), strictly increasing time
};

/// Rectangular pulse: `base` outside [start, start + width), `level` inside.
StepFunction rectangular_pulse(double base, double level, double start, double width);

struct Modulation {
  std::size_t segment;  // index into the inner PiecewisePotential
  StepFunction height;  // barrier height in E0 units
};

/// Embedded potential whose barrier segments follow step functions of time.
/// A modulated segment is shifted as a whole so its height equals the step
/// function value.
class BarrierSchedule {
 public:
  BarrierSchedule() = default;
  explicit BarrierSchedule(EmbeddedPotential base, std::vector<Modulation> modulations = {});

  const EmbeddedPotential& base() const { return base_; }
  const std::vector<Modulation>& modulations() const { return modulations_; }

  double evaluate(double x, double t) const;
  /// Static potential in effect at time t.
  EmbeddedPotential at(double t) const;
  std::vector<double> heights_at(double t) const;
  void heights_at(double t, std::vector<double>& out) const;
  /// Switching instants strictly inside (a, b), ascending, deduplicated.
  std::vector<double> switch_times_in(double a, double b) const;

 private:
  EmbeddedPotential base_;
  std::vector<Modulation> modulations_;
};

// Ingestion -----------------------------------------------------------------

/// CSV with '#' comments, a `x_unit,v_unit` header (x: nm|x0, V: meV|ueV|E0)
/// and `x,V` rows. Coordinates end up in x0 and energies in E0, shifted so the
/// minimum is zero.
SampledPotential load_potential_table(std::istream& in, const UnitSystem& units);

// Approximation ---------------------------------------------------------------

enum class ApproximationMode { coarse, fine };

struct ApproximationOptions {
  ApproximationMode mode = ApproximationMode::coarse;
  std::size_t budget = 0;
  double tolerance = 0.1;   // fine mode, E0
  double prominence = 0.5;  // extremum detection, E0
  SegmentShape shape = SegmentShape::constant;  // fine mode only
};

/// Coarse: one constant segment per well/barrier at the mean spline height.
/// Fine: starts from the coarse split and bisects the worst segment until the
/// deviation from the spline is within tolerance or the budget is used.
PiecewisePotential approximate_piecewise(const SampledPotential& p, const ApproximationOptions& options);

/// Max |approx - spline| sampled at ten points per knot interval.
double max_deviation(const PiecewisePotential& approx, const SampledPotential& reference);

EmbeddedPotential embed_in_infinite_well(InnerPotential inner, double margin_h, double total_length);

// Evaluation ------------------------------------------------------------------

double evaluate(const SampledPotential& p, double x, double t = 0.0);
double evaluate(const PiecewisePotential& p, double x, double t = 0.0);
double evaluate(const EmbeddedPotential& p, double x, double t = 0.0);
double evaluate(const BarrierSchedule& p, double x, double t);

/// Potential at the grid points; points outside [0, L] get `wall_height`.
std::vector<double> sample_on_grid(const EmbeddedPotential& p, const Grid& grid, double wall_height);
std::vector<double> sample_on_grid(const BarrierSchedule& p, const Grid& grid, double t, double wall_height);

EnergyEstimate energy_expectation(const WaveState& state, const EmbeddedPotential& p, double wall_height = 200.0);

// Dot detection ---------------------------------------------------------------

/// One interval per well, bounded by the barrier maxima between wells and by
/// the domain ends. Embedded potentials use the hard walls at 0 and L.
std::vector<Interval> segment_dots(const EmbeddedPotential& p, double prominence = 0.5);
std::vector<Interval> segment_dots(const SampledPotential& p, double prominence = 0.5);
std::vector<Interval> segment_dots(const PiecewisePotential& p, double prominence = 0.5);

namespace detail {

struct Extremum {
  bool is_max = false;
  double x = 0.0;
  double value = 0.0;
  std::size_t first = 0;  // plateau index range in the sample arrays
  std::size_t last = 0;
};

struct ExtremaScan {
  std::vector<Extremum> confirmed;
  bool has_pending = false;
  Extremum pending;  // trailing extremum not followed by a reversal
};

/// Alternating extrema whose swings are at least `prominence`.
ExtremaScan find_extrema(std::span<const double> xs, std::span<const double> vs, double prominence);

}  // namespace detail

}  // namespace qdsim
