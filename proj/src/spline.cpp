#include "qdsim/spline.hpp"

#include <gsl/gsl_spline.h>

#include "qdsim/errors.hpp"

namespace qdsim {

struct CubicSpline::Impl {
  gsl_spline* spline = nullptr;
  ~Impl() { gsl_spline_free(spline); }
};

CubicSpline::CubicSpline(std::span<const double> xs, std::span<const double> ys)
    : xs_(xs.begin(), xs.end()), ys_(ys.begin(), ys.end()) {
  if (xs_.size() != ys_.size() || xs_.size() < 4) {
    throw InvalidArgument("spline needs at least 4 points with matching x and y");
  }
  for (std::size_t i = 1; i < xs_.size(); ++i) {
    if (!(xs_[i] > xs_[i - 1])) throw InvalidArgument("spline knots must be strictly increasing");
  }
  auto impl = std::make_shared<Impl>();
  impl->spline = gsl_spline_alloc(gsl_interp_steffen, xs_.size());
  gsl_spline_init(impl->spline, xs_.data(), ys_.data(), xs_.size());
  impl_ = std::move(impl);
}

double CubicSpline::operator()(double x) const {
  if (x <= xs_.front()) return ys_.front();
  if (x >= xs_.back()) return ys_.back();
  // A null accelerator keeps evaluation free of shared mutable state.
  return gsl_spline_eval(impl_->spline, x, nullptr);
}

}  // namespace qdsim
