#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace qdsim {

using cplx = std::complex<double>;

/// Uniform 1D grid of `n_points` samples, x_i = offset + i * spacing.
///
/// The domain [offset, offset + length] carries Dirichlet walls at both ends;
/// sample 0 sits on the left wall and the right wall is one spacing past the
/// last sample.
class Grid {
 public:
  Grid(std::size_t n_points, double length, double offset = 0.0);

  std::size_t n_points() const { return n_; }
  double length() const { return length_; }
  double spacing() const { return length_ / static_cast<double>(n_); }
  double offset() const { return offset_; }
  double end() const { return offset_ + length_; }
  double x(std::size_t i) const { return offset_ + static_cast<double>(i) * spacing(); }
  std::vector<double> coordinates() const;

  bool operator==(const Grid&) const = default;

 private:
  std::size_t n_;
  double length_;
  double offset_;
};

struct Interval {
  double lo;
  double hi;
};

struct WaveState {
  Grid grid;
  std::vector<cplx> amplitudes;
  double time = 0.0;

  static WaveState zeros(const Grid& grid);
};

double norm(const WaveState& state);
void normalize(WaveState& state);

/// <a|b> on the common grid.
cplx overlap(const WaveState& a, const WaveState& b);

/// |psi|^2 per grid point.
std::vector<double> density(const WaveState& state);

/// Probability inside each region. Sample i represents the cell
/// [x_i - dx/2, x_i + dx/2); a cell cut by a region edge contributes the
/// overlapping fraction. Overlapping regions throw InvalidArgument.
std::vector<double> dot_probabilities(const WaveState& state, std::span<const Interval> regions);

struct EnergyEstimate {
  double value = 0.0;               // E0 units
  bool normalization_warning = false;  // |norm - 1| > 1e-6
};

/// <psi| -d^2/dx^2 + v |psi> / <psi|psi> with the kinetic term taken from the
/// sine spectrum of the state (Dirichlet walls at the grid ends).
EnergyEstimate energy_expectation(const WaveState& state, std::span<const double> potential_on_grid);

bool is_power_of_two(std::size_t n);

}  // namespace qdsim
