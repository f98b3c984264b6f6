#pragma once

#include <memory>
#include <span>
#include <vector>

namespace qdsim {

/// Piecewise-cubic, C1, monotonicity-preserving interpolant (Steffen) through
/// tabulated data. Never overshoots between knots, so step-like potential
/// tables do not grow spurious wells. Immutable; safe to share between threads.
class CubicSpline {
 public:
  CubicSpline() = default;
  CubicSpline(std::span<const double> xs, std::span<const double> ys);

  /// Clamped to the end values outside the knot range.
  double operator()(double x) const;
  const std::vector<double>& knots() const { return xs_; }
  const std::vector<double>& values() const { return ys_; }
  bool empty() const { return xs_.empty(); }

 private:
  struct Impl;
  std::vector<double> xs_;
  std::vector<double> ys_;
  std::shared_ptr<const Impl> impl_;
};

}  // namespace qdsim
