#include "qdsim/wavefunction.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qdsim/errors.hpp"
#include "qdsim/spectral.hpp"

namespace qdsim {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

Grid::Grid(std::size_t n_points, double length, double offset)
    : n_(n_points), length_(length), offset_(offset) {
  if (n_points < 4 || !is_power_of_two(n_points)) {
    throw InvalidArgument("grid size must be a power of 2 (>= 4), got " + std::to_string(n_points));
  }
  if (!(length > 0) || !std::isfinite(length) || !std::isfinite(offset)) {
    throw InvalidArgument("grid length must be positive and finite");
  }
}

std::vector<double> Grid::coordinates() const {
  std::vector<double> xs(n_);
  for (std::size_t i = 0; i < n_; ++i) xs[i] = x(i);
  return xs;
}

WaveState WaveState::zeros(const Grid& grid) {
  return WaveState{grid, std::vector<cplx>(grid.n_points(), 0.0), 0.0};
}

double norm(const WaveState& state) {
  double s = 0.0;
  for (const cplx& a : state.amplitudes) s += std::norm(a);
  return std::sqrt(s * state.grid.spacing());
}

void normalize(WaveState& state) {
  const double n = norm(state);
  if (n == 0.0) throw NumericError("cannot normalize a zero state");
  for (cplx& a : state.amplitudes) a /= n;
}

cplx overlap(const WaveState& a, const WaveState& b) {
  if (!(a.grid == b.grid)) throw InvalidArgument("overlap of states on different grids");
  cplx s = 0.0;
  for (std::size_t i = 0; i < a.amplitudes.size(); ++i) s += std::conj(a.amplitudes[i]) * b.amplitudes[i];
  return s * a.grid.spacing();
}

std::vector<double> density(const WaveState& state) {
  std::vector<double> d(state.amplitudes.size());
  std::transform(state.amplitudes.begin(), state.amplitudes.end(), d.begin(),
                 [](const cplx& a) { return std::norm(a); });
  return d;
}

std::vector<double> dot_probabilities(const WaveState& state, std::span<const Interval> regions) {
  std::vector<Interval> sorted(regions.begin(), regions.end());
  for (const Interval& r : sorted) {
    if (!(r.hi > r.lo)) throw InvalidArgument("region with non-positive width");
  }
  std::sort(sorted.begin(), sorted.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].lo < sorted[i - 1].hi) throw InvalidArgument("dot regions overlap");
  }

  const Grid& g = state.grid;
  const double dx = g.spacing();
  std::vector<double> p(regions.size(), 0.0);
  for (std::size_t r = 0; r < regions.size(); ++r) {
    const Interval& reg = regions[r];
    // Only cells whose extent can touch the region.
    const double first = std::floor((reg.lo - g.offset()) / dx - 0.5);
    const double last = std::ceil((reg.hi - g.offset()) / dx + 0.5);
    const auto i0 = static_cast<std::ptrdiff_t>(std::max(0.0, first));
    const auto i1 = static_cast<std::ptrdiff_t>(std::min(static_cast<double>(g.n_points()) - 1.0, last));
    double acc = 0.0;
    for (std::ptrdiff_t i = i0; i <= i1; ++i) {
      const double c = g.x(static_cast<std::size_t>(i));
      const double lo = std::max(c - 0.5 * dx, reg.lo);
      const double hi = std::min(c + 0.5 * dx, reg.hi);
      if (hi > lo) acc += std::norm(state.amplitudes[static_cast<std::size_t>(i)]) * (hi - lo);
    }
    p[r] = acc;
  }
  return p;
}

EnergyEstimate energy_expectation(const WaveState& state, std::span<const double> potential_on_grid) {
  const Grid& g = state.grid;
  if (potential_on_grid.size() != g.n_points()) throw InvalidArgument("potential/grid size mismatch");

  SineTransform fft(g);
  fft.load(state.amplitudes);
  fft.forward();
  const auto spec = fft.buffer();
  const auto& k = fft.wavenumbers();
  double kin = 0.0;
  double total = 0.0;
  for (std::size_t j = 0; j < spec.size(); ++j) {
    const double w = std::norm(spec[j]);
    kin += k[j] * k[j] * w;
    total += w;
  }

  double pot = 0.0;
  double n2 = 0.0;
  // Sample 0 sits on the wall and is excluded from the spectral representation.
  for (std::size_t i = 1; i < g.n_points(); ++i) {
    const double d = std::norm(state.amplitudes[i]);
    pot += potential_on_grid[i] * d;
    n2 += d;
  }

  EnergyEstimate e;
  if (n2 == 0.0 || total == 0.0) throw NumericError("energy of a zero state");
  e.value = kin / total + pot / n2;
  e.normalization_warning = std::abs(norm(state) - 1.0) > 1e-6;
  return e;
}

}  // namespace qdsim
