#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <iosfwd>
#include <vector>

namespace qdsim {

/// Rectangular hopping pulse on the link between adjacent sites j and k
/// (0-based). Hopping is t_high on [t_start, t_start + width], t_low elsewhere.
struct Pulse {
  std::size_t j = 0;
  std::size_t k = 1;
  double t_low = 0.0;   // E0
  double t_high = 0.0;  // E0
  double t_start = 0.0; // t0
  double width = 0.0;   // t0
};

class TBSchedule {
 public:
  TBSchedule() = default;
  /// Same resting hopping on every link.
  TBSchedule(std::size_t n_sites, double default_hopping, std::vector<Pulse> pulses = {});
  /// Resting hopping per link (n_sites - 1 entries). Each pulse's t_low must
  /// match the resting value of its link.
  TBSchedule(std::size_t n_sites, std::vector<double> link_hopping, std::vector<Pulse> pulses = {});

  std::size_t n_sites() const { return n_sites_; }
  const std::vector<Pulse>& pulses() const { return pulses_; }
  const std::vector<double>& link_hopping() const { return link_hopping_; }

  /// Link index of the adjacent pair (j, k); throws for non-adjacent sites.
  std::size_t link_index(std::size_t j, std::size_t k) const;
  /// Pulse edges, ascending, deduplicated.
  std::vector<double> switch_times() const;

 private:
  std::size_t n_sites_ = 0;
  std::vector<double> link_hopping_;
  std::vector<Pulse> pulses_;
};

double hopping_at(const TBSchedule& schedule, std::size_t j, std::size_t k, double t);

/// Tridiagonal, zero diagonal, off-diagonals -t_h(t).
Eigen::MatrixXd hamiltonian_at(const TBSchedule& schedule, double t);

struct AmplitudeTrace {
  std::vector<double> times;
  std::vector<Eigen::VectorXcd> amplitudes;

  std::vector<double> probabilities(std::size_t record) const;
};

/// Exact propagation C(t + d) = exp(-i 2 pi H d) C(t) over every interval where
/// H is constant, from t = 0 to `horizon`, recorded every `record_dt` and at the
/// horizon.
AmplitudeTrace propagate(const Eigen::VectorXcd& c0, const TBSchedule& schedule, double horizon, double record_dt);

/// T0 = 1 / (2 t_h) in t0 units.
double rabi_period(double t_h);

enum class GateKind { transport, half_split };

/// T0/2 + k T0 (transport) or T0/4 + k T0 (half split).
double gate_pulse_width(GateKind kind, double T0, int k);

/// `t,re_c1,im_c1,...`
void write_amplitudes_csv(std::ostream& out, const AmplitudeTrace& trace);
/// `t,p1,...`
void write_tb_probabilities_csv(std::ostream& out, const AmplitudeTrace& trace);

}  // namespace qdsim
