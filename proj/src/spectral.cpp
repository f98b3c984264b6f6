#include "qdsim/spectral.hpp"

#include <fftw3.h>

#include <mutex>
#include <numbers>
#include <utility>

namespace qdsim {

namespace {

// Plan creation and destruction in FFTW are not thread-safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

SineTransform::SineTransform(const Grid& grid) : n_(grid.n_points()) {
  const std::size_t m = 2 * n_;
  k_.resize(m);
  const double base = std::numbers::pi / grid.length();
  for (std::size_t j = 0; j < m; ++j) {
    const double mode = j <= n_ ? static_cast<double>(j) : static_cast<double>(j) - static_cast<double>(m);
    k_[j] = base * mode;
  }

  std::lock_guard lock(planner_mutex());
  data_ = reinterpret_cast<cplx*>(fftw_alloc_complex(m));
  // FFTW_ESTIMATE keeps the plan choice, and therefore the rounding, identical across runs.
  forward_plan_ = fftw_plan_dft_1d(static_cast<int>(m), as_fftw(data_), as_fftw(data_), FFTW_FORWARD,
                                   FFTW_ESTIMATE);
  backward_plan_ = fftw_plan_dft_1d(static_cast<int>(m), as_fftw(data_), as_fftw(data_), FFTW_BACKWARD,
                                    FFTW_ESTIMATE);
}

SineTransform::~SineTransform() { release(); }

void SineTransform::release() {
  if (data_ == nullptr) return;
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(backward_plan_));
  fftw_free(data_);
  data_ = nullptr;
}

SineTransform::SineTransform(SineTransform&& other) noexcept
    : n_(other.n_),
      data_(std::exchange(other.data_, nullptr)),
      forward_plan_(std::exchange(other.forward_plan_, nullptr)),
      backward_plan_(std::exchange(other.backward_plan_, nullptr)),
      k_(std::move(other.k_)) {}

SineTransform& SineTransform::operator=(SineTransform&& other) noexcept {
  if (this != &other) {
    release();
    n_ = other.n_;
    data_ = std::exchange(other.data_, nullptr);
    forward_plan_ = std::exchange(other.forward_plan_, nullptr);
    backward_plan_ = std::exchange(other.backward_plan_, nullptr);
    k_ = std::move(other.k_);
  }
  return *this;
}

void SineTransform::load(std::span<const cplx> psi) {
  const std::size_t m = 2 * n_;
  data_[0] = 0.0;
  data_[n_] = 0.0;
  for (std::size_t i = 1; i < n_; ++i) {
    data_[i] = psi[i];
    data_[m - i] = -psi[i];
  }
}

void SineTransform::forward() { fftw_execute(static_cast<fftw_plan>(forward_plan_)); }

void SineTransform::backward() { fftw_execute(static_cast<fftw_plan>(backward_plan_)); }

void SineTransform::store(std::span<cplx> psi) const {
  const double scale = 1.0 / static_cast<double>(2 * n_);
  psi[0] = 0.0;
  for (std::size_t i = 1; i < n_; ++i) psi[i] = data_[i] * scale;
}

}  // namespace qdsim
