#include "qdsim/eigensolver.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string>

#include "qdsim/errors.hpp"

namespace qdsim {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kQuadratureTol = 1e-9;

/// Antiderivative of (alpha + beta x) cos(c x).
double cos_antiderivative(double c, double alpha, double beta, double x) {
  if (c == 0.0) return alpha * x + 0.5 * beta * x * x;
  const double s = std::sin(c * x);
  const double co = std::cos(c * x);
  return alpha * s / c + beta * (x * s / c + co / (c * c));
}

/// F_j = integral over [a, b] of (alpha + beta x) cos(j pi x / L), j = 0..jmax.
std::vector<double> cosine_moments_linear(double a, double b, double alpha, double beta, std::size_t jmax,
                                          double L) {
  std::vector<double> f(jmax + 1);
  for (std::size_t j = 0; j <= jmax; ++j) {
    const double c = kPi * static_cast<double>(j) / L;
    f[j] = cos_antiderivative(c, alpha, beta, b) - cos_antiderivative(c, alpha, beta, a);
  }
  return f;
}

void check_segment(double a, double b, std::size_t k, std::size_t m, double L) {
  if (!(b > a)) throw InvalidArgument("segment needs a < b");
  if (k == 0 || m == 0) throw InvalidArgument("basis indices start at 1");
  if (!(L > 0)) throw InvalidArgument("well width must be positive");
}

/// Gauss-Legendre nodes and weights times V over [a, b], split at the knots
/// and into panels no longer than `max_panel`.
struct Quadrature {
  std::vector<double> x;
  std::vector<double> wv;
};

Quadrature spline_quadrature(const SampledPotential& p, double shift, double a, double b, double max_panel) {
  using GL = boost::math::quadrature::gauss<double, 8>;
  const auto& abscissa = GL::abscissa();
  const auto& weights = GL::weights();
  std::vector<double> cuts{a};
  for (double u : p.xs()) {
    const double x = u + shift;
    if (x > a && x < b) cuts.push_back(x);
  }
  cuts.push_back(b);
  Quadrature q;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double w = cuts[i + 1] - cuts[i];
    const auto panels = static_cast<std::size_t>(std::ceil(w / max_panel));
    const double h = w / static_cast<double>(std::max<std::size_t>(panels, 1));
    for (std::size_t j = 0; j < std::max<std::size_t>(panels, 1); ++j) {
      const double mid = cuts[i] + (static_cast<double>(j) + 0.5) * h;
      for (std::size_t n = 0; n < abscissa.size(); ++n) {
        for (int sgn : {-1, 1}) {
          if (abscissa[n] == 0.0 && sgn > 0) continue;
          const double x = mid + sgn * 0.5 * h * abscissa[n];
          q.x.push_back(x);
          q.wv.push_back(0.5 * h * weights[n] * p.evaluate(x - shift));
        }
      }
    }
  }
  return q;
}

std::vector<double> cosine_moments(const Quadrature& q, std::span<const std::size_t> js, double L) {
  std::vector<double> g(js.size(), 0.0);
  for (std::size_t i = 0; i < js.size(); ++i) {
    const double c = kPi * static_cast<double>(js[i]) / L;
    double s = 0.0;
    for (std::size_t n = 0; n < q.x.size(); ++n) s += q.wv[n] * std::cos(c * q.x[n]);
    g[i] = s;
  }
  return g;
}

/// Moments j = 0..jmax of a spline region, refined until two successive
/// panel sizes agree to the quadrature tolerance (scaled by 1/L in V_km).
std::vector<double> converged_spline_moments(const SampledPotential& p, double shift, double a, double b,
                                             std::size_t jmax, double L) {
  std::vector<std::size_t> js(jmax + 1);
  for (std::size_t j = 0; j <= jmax; ++j) js[j] = j;
  double panel = L / static_cast<double>(std::max<std::size_t>(jmax, 1));
  std::vector<double> prev = cosine_moments(spline_quadrature(p, shift, a, b, panel), js, L);
  double diff = std::numeric_limits<double>::infinity();
  for (int level = 0; level < 4; ++level) {
    panel *= 0.5;
    std::vector<double> next = cosine_moments(spline_quadrature(p, shift, a, b, panel), js, L);
    diff = 0.0;
    for (std::size_t j = 0; j <= jmax; ++j) diff = std::max(diff, std::abs(next[j] - prev[j]));
    // V_km combines two moments and divides by L.
    diff *= 2.0 / L;
    prev = std::move(next);
    if (diff <= kQuadratureTol) return prev;
  }
  throw QuadratureError(diff, kQuadratureTol);
}

void add_moments(Eigen::MatrixXd& v, const std::vector<double>& f, double L) {
  const auto n = static_cast<std::size_t>(v.rows());
  for (std::size_t k = 1; k <= n; ++k) {
    for (std::size_t m = k; m <= n; ++m) {
      const double val = (f[m - k] - f[k + m]) / L;
      v(static_cast<Eigen::Index>(k - 1), static_cast<Eigen::Index>(m - 1)) += val;
      if (m != k) v(static_cast<Eigen::Index>(m - 1), static_cast<Eigen::Index>(k - 1)) += val;
    }
  }
}

void add_constant(Eigen::MatrixXd& v, double a, double b, double value, double L) {
  if (!(b > a) || value == 0.0) return;
  add_moments(v, cosine_moments_linear(a, b, value, 0.0, 2 * static_cast<std::size_t>(v.rows()), L), L);
}

void add_linear(Eigen::MatrixXd& v, double a, double b, double va, double vb, double L) {
  const double beta = (vb - va) / (b - a);
  const double alpha = va - beta * a;
  add_moments(v, cosine_moments_linear(a, b, alpha, beta, 2 * static_cast<std::size_t>(v.rows()), L), L);
}

}  // namespace

double BasisSpec::free_energy(std::size_t m) const {
  const double k = kPi * static_cast<double>(m) / L;
  return k * k;
}

double matrix_element_piecewise(double a, double b, double v, std::size_t k, std::size_t m, double L) {
  return matrix_element_linear(a, b, v, v, k, m, L);
}

double matrix_element_linear(double a, double b, double va, double vb, std::size_t k, std::size_t m, double L) {
  check_segment(a, b, k, m, L);
  const double beta = (vb - va) / (b - a);
  const double alpha = va - beta * a;
  const double cm = kPi * static_cast<double>(k > m ? k - m : m - k) / L;
  const double cp = kPi * static_cast<double>(k + m) / L;
  const double im = cos_antiderivative(cm, alpha, beta, b) - cos_antiderivative(cm, alpha, beta, a);
  const double ip = cos_antiderivative(cp, alpha, beta, b) - cos_antiderivative(cp, alpha, beta, a);
  return (im - ip) / L;
}

double matrix_element_sampled(const SampledPotential& p, std::size_t k, std::size_t m, double L) {
  check_segment(0.0, L, k, m, L);
  const std::size_t j[2] = {k > m ? k - m : m - k, k + m};
  double panel = L / static_cast<double>(k + m);
  auto once = [&](double h) {
    const auto g = cosine_moments(spline_quadrature(p, 0.0, 0.0, L, h), j, L);
    return (g[0] - g[1]) / L;
  };
  double prev = once(panel);
  double diff = 0.0;
  for (int level = 0; level < 6; ++level) {
    panel *= 0.5;
    const double next = once(panel);
    diff = std::abs(next - prev);
    prev = next;
    if (diff <= kQuadratureTol) return prev;
  }
  throw QuadratureError(diff, kQuadratureTol);
}

Eigen::MatrixXd potential_matrix(const EmbeddedPotential& p, const BasisSpec& basis) {
  if (basis.n_basis < 1) throw InvalidArgument("basis needs at least one function");
  if (std::abs(basis.L - p.length()) > 1e-12 * p.length()) {
    throw InvalidArgument("basis width " + std::to_string(basis.L) + " differs from potential width " +
                          std::to_string(p.length()));
  }
  const double L = p.length();
  const auto n = static_cast<Eigen::Index>(basis.n_basis);
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(n, n);
  if (p.empty()) return v;

  add_constant(v, 0.0, p.inner_start(), p.left_plateau(), L);
  add_constant(v, p.inner_end(), L, p.right_plateau(), L);
  const double shift = p.shift();
  if (const auto* pw = std::get_if<PiecewisePotential>(&p.inner())) {
    const auto& bp = pw->breakpoints();
    for (std::size_t i = 0; i < pw->segments(); ++i) {
      const double a = bp[i] + shift;
      const double b = bp[i + 1] + shift;
      if (pw->shape() == SegmentShape::constant) {
        add_constant(v, a, b, pw->start_value(i), L);
      } else {
        add_linear(v, a, b, pw->start_value(i), pw->end_value(i), L);
      }
    }
  } else {
    const auto& sp = std::get<SampledPotential>(p.inner());
    add_moments(v, converged_spline_moments(sp, shift, p.inner_start(), p.inner_end(), 2 * basis.n_basis, L), L);
  }
  return v;
}

Eigen::MatrixXd assemble_hamiltonian(const EmbeddedPotential& p, const BasisSpec& basis) {
  Eigen::MatrixXd h = potential_matrix(p, basis);
  for (std::size_t m = 1; m <= basis.n_basis; ++m) {
    const auto i = static_cast<Eigen::Index>(m - 1);
    h(i, i) += basis.free_energy(m);
  }
  return h;
}

double default_bound_threshold(const EmbeddedPotential& p) {
  if (p.empty()) return std::numeric_limits<double>::infinity();
  return std::min(p.left_plateau(), p.right_plateau());
}

EigenSolution diagonalize(const Eigen::MatrixXd& hamiltonian, const BasisSpec& basis, double bound_threshold) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hamiltonian);
  if (es.info() != Eigen::Success) throw NumericError("symmetric eigendecomposition failed");
  EigenSolution sol;
  sol.basis = basis;
  sol.bound_threshold = bound_threshold;
  sol.energies = es.eigenvalues();
  sol.coefficients = es.eigenvectors().transpose();
  for (Eigen::Index n = 0; n < sol.coefficients.rows(); ++n) {
    Eigen::Index at = 0;
    sol.coefficients.row(n).cwiseAbs().maxCoeff(&at);
    if (sol.coefficients(n, at) < 0) sol.coefficients.row(n) *= -1.0;
  }
  sol.n_bound = static_cast<std::size_t>((sol.energies.array() < bound_threshold).count());
  return sol;
}

EigenSolution solve_bound_states(const EmbeddedPotential& p, const BasisSpec& basis,
                                 std::optional<double> bound_threshold) {
  return diagonalize(assemble_hamiltonian(p, basis), basis, bound_threshold.value_or(default_bound_threshold(p)));
}

namespace {

WaveState synthesize(const Eigen::Ref<const Eigen::RowVectorXd>& c, const BasisSpec& basis, const Grid& grid) {
  WaveState s = WaveState::zeros(grid);
  const double L = basis.L;
  const double amp = std::sqrt(2.0 / L);
  for (std::size_t i = 0; i < grid.n_points(); ++i) {
    const double x = grid.x(i);
    if (x <= 0.0 || x >= L) continue;
    double acc = 0.0;
    for (Eigen::Index m = 0; m < c.size(); ++m) acc += c(m) * std::sin(kPi * static_cast<double>(m + 1) * x / L);
    s.amplitudes[i] = amp * acc;
  }
  return s;
}

/// Quadrature weight (cell overlap times dx) of each grid point inside a region.
std::vector<double> cell_weights(const Grid& g, const Interval& reg) {
  std::vector<double> w(g.n_points(), 0.0);
  const double dx = g.spacing();
  for (std::size_t i = 0; i < g.n_points(); ++i) {
    const double c = g.x(i);
    const double lo = std::max(c - 0.5 * dx, reg.lo);
    const double hi = std::min(c + 0.5 * dx, reg.hi);
    if (hi > lo) w[i] = hi - lo;
  }
  return w;
}

}  // namespace

WaveState reconstruct_wavefunction(const EigenSolution& sol, std::size_t n, const Grid& grid) {
  if (n >= sol.n_bound) {
    throw InvalidArgument("state " + std::to_string(n) + " requested, only " + std::to_string(sol.n_bound) +
                          " bound states");
  }
  return synthesize(sol.coefficients.row(static_cast<Eigen::Index>(n)), sol.basis, grid);
}

LocalizedBasis localized_states(const EigenSolution& sol, std::span<const Interval> wells, const Grid& grid) {
  const std::size_t nw = wells.size();
  if (nw == 0) throw InvalidArgument("no wells given");
  if (nw > sol.n_bound) {
    throw CalibrationError(std::to_string(nw) + " wells but only " + std::to_string(sol.n_bound) +
                           " bound states");
  }
  const auto n = static_cast<Eigen::Index>(nw);
  Eigen::MatrixXd psi(n, static_cast<Eigen::Index>(grid.n_points()));
  for (std::size_t i = 0; i < nw; ++i) {
    const WaveState s = reconstruct_wavefunction(sol, i, grid);
    for (std::size_t j = 0; j < grid.n_points(); ++j) psi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = s.amplitudes[j].real();
  }

  Eigen::MatrixXd label = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t w = 0; w < nw; ++w) {
    const auto cw = cell_weights(grid, wells[w]);
    const Eigen::Map<const Eigen::VectorXd> wv(cw.data(), static_cast<Eigen::Index>(cw.size()));
    label += static_cast<double>(w + 1) * (psi * wv.asDiagonal() * psi.transpose());
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(label);
  if (es.info() != Eigen::Success) throw NumericError("well-label eigendecomposition failed");

  LocalizedBasis out;
  out.rotation = es.eigenvectors();
  out.energies = sol.energies.head(n);
  const Eigen::MatrixXd band = sol.coefficients.topRows(n);
  out.coefficients = out.rotation.transpose() * band;
  for (Eigen::Index w = 0; w < n; ++w) {
    Eigen::Index at = 0;
    out.coefficients.row(w).cwiseAbs().maxCoeff(&at);
    if (out.coefficients(w, at) < 0) {
      out.coefficients.row(w) *= -1.0;
      out.rotation.col(w) *= -1.0;
    }
    out.states.push_back(synthesize(out.coefficients.row(w), sol.basis, grid));
  }
  return out;
}

Eigen::MatrixXd effective_hamiltonian(const LocalizedBasis& basis) {
  return basis.rotation.transpose() * basis.energies.asDiagonal() * basis.rotation;
}

double hopping_from_splitting(const EigenSolution& sol, std::size_t lower, std::size_t upper) {
  if (!(lower < upper)) throw InvalidArgument("doublet indices must be ascending");
  if (upper >= static_cast<std::size_t>(sol.energies.size())) throw InvalidArgument("doublet index out of range");
  return 0.5 * (sol.energies(static_cast<Eigen::Index>(upper)) - sol.energies(static_cast<Eigen::Index>(lower)));
}

void write_spectrum_csv(std::ostream& out, const EigenSolution& sol) {
  out << "n,energy_E0,bound_flag\n";
  out.precision(12);
  for (Eigen::Index n = 0; n < sol.energies.size(); ++n) {
    out << n << ',' << sol.energies(n) << ',' << (static_cast<std::size_t>(n) < sol.n_bound ? 1 : 0) << '\n';
  }
}

void write_wavefunction_csv(std::ostream& out, const WaveState& state) {
  out << "x,re,im\n";
  out.precision(12);
  for (std::size_t i = 0; i < state.amplitudes.size(); ++i) {
    out << state.grid.x(i) << ',' << state.amplitudes[i].real() << ',' << state.amplitudes[i].imag() << '\n';
  }
}

}  // namespace qdsim
