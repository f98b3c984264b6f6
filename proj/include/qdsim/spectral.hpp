#pragma once

#include <complex>
#include <span>
#include <vector>

#include "qdsim/wavefunction.hpp"

namespace qdsim {

/// FFT over the odd extension of a grid function.
///
/// An n-point Dirichlet grid is mirrored into a 2n-point periodic array
/// (0, psi_1..psi_{n-1}, 0, -psi_{n-1}..-psi_1), so the Fourier modes are the
/// infinite-well sines sin(m pi x / L) with wavenumber m pi / L. Owns its
/// FFTW plans and buffer; one instance per thread.
class SineTransform {
 public:
  explicit SineTransform(const Grid& grid);
  ~SineTransform();
  SineTransform(const SineTransform&) = delete;
  SineTransform& operator=(const SineTransform&) = delete;
  SineTransform(SineTransform&& other) noexcept;
  SineTransform& operator=(SineTransform&& other) noexcept;

  std::size_t extended_size() const { return 2 * n_; }
  std::span<cplx> buffer() { return {data_, 2 * n_}; }
  std::span<const cplx> buffer() const { return {data_, 2 * n_}; }

  /// Wavenumber of each FFT bin of the extended array.
  const std::vector<double>& wavenumbers() const { return k_; }

  void load(std::span<const cplx> psi);
  void forward();
  void backward();
  /// Writes the physical half back, dividing by 2n; psi[0] is set to zero.
  void store(std::span<cplx> psi) const;

 private:
  void release();

  std::size_t n_ = 0;
  cplx* data_ = nullptr;
  void* forward_plan_ = nullptr;
  void* backward_plan_ = nullptr;
  std::vector<double> k_;
};

}  // namespace qdsim
