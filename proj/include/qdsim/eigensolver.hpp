#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "qdsim/potential.hpp"
#include "qdsim/wavefunction.hpp"

namespace qdsim {

/// Sine basis of the infinite well [0, L]: sqrt(2/L) sin(m pi x / L), m = 1..n_basis.
struct BasisSpec {
  std::size_t n_basis = 320;
  double L = 0.0;

  double free_energy(std::size_t m) const;
};

struct EigenSolution {
  Eigen::VectorXd energies;      // ascending, E0 units
  Eigen::MatrixXd coefficients;  // row n holds c_nm of state n
  std::size_t n_bound = 0;
  double bound_threshold = std::numeric_limits<double>::infinity();
  BasisSpec basis;
};

/// (2/L) * integral over [a, b] of v * sin(k pi x/L) sin(m pi x/L), closed form.
double matrix_element_piecewise(double a, double b, double v, std::size_t k, std::size_t m, double L);

/// Same for a potential varying linearly from va at a to vb at b.
double matrix_element_linear(double a, double b, double va, double vb, std::size_t k, std::size_t m, double L);

/// Spline-aware Gauss-Legendre quadrature of a table whose coordinates are
/// already in the [0, L] frame (clamped to end values outside the table).
double matrix_element_sampled(const SampledPotential& p, std::size_t k, std::size_t m, double L);

/// V_km for every basis pair.
Eigen::MatrixXd potential_matrix(const EmbeddedPotential& p, const BasisSpec& basis);

/// H_km = (k pi / L)^2 delta_km + V_km.
Eigen::MatrixXd assemble_hamiltonian(const EmbeddedPotential& p, const BasisSpec& basis);

/// Lower of the two plateau levels around the inner potential; +inf without one.
double default_bound_threshold(const EmbeddedPotential& p);

EigenSolution diagonalize(const Eigen::MatrixXd& hamiltonian, const BasisSpec& basis, double bound_threshold);

EigenSolution solve_bound_states(const EmbeddedPotential& p, const BasisSpec& basis,
                                 std::optional<double> bound_threshold = std::nullopt);

/// psi_n sampled on the grid (zero outside [0, L]).
WaveState reconstruct_wavefunction(const EigenSolution& sol, std::size_t n, const Grid& grid);

struct LocalizedBasis {
  std::vector<WaveState> states;  // one per well, left to right
  Eigen::MatrixXd rotation;       // column w: eigenstate weights of localized state w
  Eigen::MatrixXd coefficients;   // row w: sine-basis coefficients of localized state w
  Eigen::VectorXd energies;       // eigenvalues of the band used
};

/// Unitary combinations of the lowest len(wells) eigenstates, each concentrated
/// in one well. Built by diagonalizing the well-label operator sum_w (w+1) P_w
/// inside the band.
LocalizedBasis localized_states(const EigenSolution& sol, std::span<const Interval> wells, const Grid& grid);

/// Band Hamiltonian in the localized basis: U^T diag(E) U. Off-diagonal entries
/// are minus the hopping amplitudes between dots.
Eigen::MatrixXd effective_hamiltonian(const LocalizedBasis& basis);

/// (E_upper - E_lower) / 2 for a tunnelling doublet.
double hopping_from_splitting(const EigenSolution& sol, std::size_t lower, std::size_t upper);

/// `n,energy_E0,bound_flag`
void write_spectrum_csv(std::ostream& out, const EigenSolution& sol);

/// `x,re,im`
void write_wavefunction_csv(std::ostream& out, const WaveState& state);

}  // namespace qdsim
