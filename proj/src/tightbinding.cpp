#include "qdsim/tightbinding.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string>

#include "qdsim/errors.hpp"

namespace qdsim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool covers(const Pulse& p, double t) { return t >= p.t_start && t <= p.t_start + p.width; }

}  // namespace

TBSchedule::TBSchedule(std::size_t n_sites, double default_hopping, std::vector<Pulse> pulses)
    : TBSchedule(n_sites, std::vector<double>(n_sites > 0 ? n_sites - 1 : 0, default_hopping), std::move(pulses)) {}

TBSchedule::TBSchedule(std::size_t n_sites, std::vector<double> link_hopping, std::vector<Pulse> pulses)
    : n_sites_(n_sites), link_hopping_(std::move(link_hopping)), pulses_(std::move(pulses)) {
  if (n_sites_ < 1) throw InvalidArgument("tight-binding model needs at least one site");
  if (link_hopping_.size() != n_sites_ - 1) throw InvalidArgument("need one resting hopping per link");
  for (double h : link_hopping_) {
    if (!std::isfinite(h) || h < 0) throw InvalidArgument("hopping must be finite and non-negative");
  }
  for (const Pulse& p : pulses_) {
    const std::size_t l = link_index(p.j, p.k);
    if (!(p.width > 0) || !std::isfinite(p.width) || !std::isfinite(p.t_start)) {
      throw InvalidArgument("pulse width must be positive and times finite");
    }
    if (!std::isfinite(p.t_high) || !(p.t_high >= p.t_low) || !(p.t_low >= 0)) {
      throw InvalidArgument("pulse needs t_high >= t_low >= 0");
    }
    if (std::abs(p.t_low - link_hopping_[l]) > 1e-12 * std::max(1.0, std::abs(p.t_low))) {
      throw InvalidArgument("pulse t_low differs from the resting hopping of link " + std::to_string(l));
    }
  }
  for (std::size_t a = 0; a < pulses_.size(); ++a) {
    for (std::size_t b = a + 1; b < pulses_.size(); ++b) {
      const Pulse& p = pulses_[a];
      const Pulse& q = pulses_[b];
      if (link_index(p.j, p.k) != link_index(q.j, q.k)) continue;
      const bool disjoint = p.t_start + p.width <= q.t_start || q.t_start + q.width <= p.t_start;
      if (!disjoint) throw InvalidArgument("overlapping pulses on link " + std::to_string(link_index(p.j, p.k)));
    }
  }
}

std::size_t TBSchedule::link_index(std::size_t j, std::size_t k) const {
  const std::size_t lo = std::min(j, k);
  const std::size_t hi = std::max(j, k);
  if (hi - lo != 1 || hi >= n_sites_) {
    throw InvalidArgument("sites " + std::to_string(j) + " and " + std::to_string(k) + " are not an adjacent pair");
  }
  return lo;
}

std::vector<double> TBSchedule::switch_times() const {
  std::vector<double> t;
  for (const Pulse& p : pulses_) {
    t.push_back(p.t_start);
    t.push_back(p.t_start + p.width);
  }
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  return t;
}

double hopping_at(const TBSchedule& schedule, std::size_t j, std::size_t k, double t) {
  const std::size_t l = schedule.link_index(j, k);
  for (const Pulse& p : schedule.pulses()) {
    if (std::min(p.j, p.k) == l && covers(p, t)) return p.t_high;
  }
  return schedule.link_hopping()[l];
}

Eigen::MatrixXd hamiltonian_at(const TBSchedule& schedule, double t) {
  const auto n = static_cast<Eigen::Index>(schedule.n_sites());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index l = 0; l + 1 < n; ++l) {
    const double th = hopping_at(schedule, static_cast<std::size_t>(l), static_cast<std::size_t>(l + 1), t);
    h(l, l + 1) = -th;
    h(l + 1, l) = -th;
  }
  return h;
}

std::vector<double> AmplitudeTrace::probabilities(std::size_t record) const {
  const auto& c = amplitudes.at(record);
  std::vector<double> p(static_cast<std::size_t>(c.size()));
  for (Eigen::Index i = 0; i < c.size(); ++i) p[static_cast<std::size_t>(i)] = std::norm(c(i));
  return p;
}

AmplitudeTrace propagate(const Eigen::VectorXcd& c0, const TBSchedule& schedule, double horizon, double record_dt) {
  if (static_cast<std::size_t>(c0.size()) != schedule.n_sites()) throw InvalidArgument("amplitude/site count mismatch");
  if (std::abs(c0.norm() - 1.0) > 1e-12) throw InvalidArgument("initial amplitudes must be normalized");
  if (!(horizon >= 0) || !(record_dt > 0)) throw InvalidArgument("horizon must be >= 0 and record step > 0");

  const auto n_records = static_cast<std::size_t>(std::floor(horizon / record_dt + 1e-9));
  std::vector<double> records;
  for (std::size_t i = 0; i <= n_records; ++i) records.push_back(std::min(horizon, static_cast<double>(i) * record_dt));
  if (records.back() < horizon) records.push_back(horizon);

  std::vector<double> events = records;
  for (double s : schedule.switch_times()) {
    if (s > 0.0 && s < horizon) events.push_back(s);
  }
  std::sort(events.begin(), events.end());
  events.erase(std::unique(events.begin(), events.end()), events.end());

  AmplitudeTrace trace;
  Eigen::VectorXcd c = c0;
  std::size_t next_record = 0;
  Eigen::MatrixXd cached_h;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  double t = 0.0;
  for (double e : events) {
    if (e > t) {
      const Eigen::MatrixXd h = hamiltonian_at(schedule, 0.5 * (t + e));
      if (cached_h.size() == 0 || h != cached_h) {
        es.compute(h);
        cached_h = h;
      }
      const Eigen::VectorXd& w = es.eigenvalues();
      const Eigen::MatrixXd& v = es.eigenvectors();
      Eigen::VectorXcd phase(w.size());
      for (Eigen::Index i = 0; i < w.size(); ++i) phase(i) = std::polar(1.0, -kTwoPi * w(i) * (e - t));
      c = v.cast<std::complex<double>>() * (phase.asDiagonal() * (v.transpose().cast<std::complex<double>>() * c));
      t = e;
    }
    while (next_record < records.size() && records[next_record] <= t) {
      trace.times.push_back(records[next_record]);
      trace.amplitudes.push_back(c);
      ++next_record;
    }
  }
  return trace;
}

double rabi_period(double t_h) {
  if (!(t_h > 0)) throw InvalidArgument("hopping must be positive for a Rabi period");
  return 1.0 / (2.0 * t_h);
}

double gate_pulse_width(GateKind kind, double T0, int k) {
  if (k < 0) throw InvalidArgument("gate repetition count must be non-negative");
  if (!(T0 > 0)) throw InvalidArgument("Rabi period must be positive");
  const double base = kind == GateKind::transport ? 0.5 * T0 : 0.25 * T0;
  return base + static_cast<double>(k) * T0;
}

void write_amplitudes_csv(std::ostream& out, const AmplitudeTrace& trace) {
  const std::size_t n = trace.amplitudes.empty() ? 0 : static_cast<std::size_t>(trace.amplitudes.front().size());
  out << 't';
  for (std::size_t i = 1; i <= n; ++i) out << ",re_c" << i << ",im_c" << i;
  out << '\n';
  out.precision(12);
  for (std::size_t r = 0; r < trace.times.size(); ++r) {
    out << trace.times[r];
    for (Eigen::Index i = 0; i < trace.amplitudes[r].size(); ++i) {
      out << ',' << trace.amplitudes[r](i).real() << ',' << trace.amplitudes[r](i).imag();
    }
    out << '\n';
  }
}

void write_tb_probabilities_csv(std::ostream& out, const AmplitudeTrace& trace) {
  const std::size_t n = trace.amplitudes.empty() ? 0 : static_cast<std::size_t>(trace.amplitudes.front().size());
  out << 't';
  for (std::size_t i = 1; i <= n; ++i) out << ",p" << i;
  out << '\n';
  out.precision(12);
  for (std::size_t r = 0; r < trace.times.size(); ++r) {
    out << trace.times[r];
    for (double p : trace.probabilities(r)) out << ',' << p;
    out << '\n';
  }
}

}  // namespace qdsim
