#include "qdsim/potential.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <charconv>
#include <cmath>
#include <functional>
#include <istream>
#include <limits>
#include <set>
#include <string>

#include "qdsim/errors.hpp"

namespace qdsim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

double gauss8(const std::function<double(double)>& f, double a, double b) {
  return boost::math::quadrature::gauss<double, 8>::integrate(f, a, b);
}

/// Integral of the spline over [a, b], one Gauss rule per knot interval.
double integrate_spline(const SampledPotential& p, double a, double b) {
  const auto& xs = p.xs();
  auto f = [&p](double x) { return p.evaluate(x); };
  double sum = 0.0;
  double left = a;
  auto it = std::upper_bound(xs.begin(), xs.end(), a);
  for (; it != xs.end() && *it < b; ++it) {
    sum += gauss8(f, left, *it);
    left = *it;
  }
  sum += gauss8(f, left, b);
  return sum;
}

/// Ten samples per knot interval plus the last knot.
std::vector<double> oversampled_points(const SampledPotential& p) {
  const auto& xs = p.xs();
  std::vector<double> out;
  out.reserve(10 * xs.size());
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    const double h = xs[i + 1] - xs[i];
    for (int j = 0; j < 10; ++j) out.push_back(xs[i] + h * j / 10.0);
  }
  out.push_back(xs.back());
  return out;
}

std::vector<double> piecewise_sample_points(const PiecewisePotential& p) {
  std::vector<double> out;
  const auto& b = p.breakpoints();
  for (std::size_t i = 0; i < p.segments(); ++i) {
    const double w = b[i + 1] - b[i];
    for (int j = 0; j < 16; ++j) out.push_back(b[i] + w * (j + 0.5) / 16.0);
  }
  return out;
}

/// First crossing of the half level between two extrema, refined by bisection.
double half_level_crossing(const std::vector<double>& xs, const std::vector<double>& vs,
                           const detail::Extremum& a, const detail::Extremum& b,
                           const std::function<double(double)>& f) {
  const double level = 0.5 * (a.value + b.value);
  for (std::size_t i = a.last; i < b.first; ++i) {
    const double s0 = vs[i] - level;
    const double s1 = vs[i + 1] - level;
    if (s0 == 0.0) return xs[i];
    if (s0 * s1 < 0.0) {
      double lo = xs[i];
      double hi = xs[i + 1];
      const bool rising = s0 < 0.0;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        const bool below = f(mid) < level;
        if (below == rising) lo = mid; else hi = mid;
      }
      return 0.5 * (lo + hi);
    }
  }
  return 0.5 * (a.x + b.x);
}

struct Scan {
  std::vector<double> xs;
  std::vector<double> vs;
};

std::vector<Interval> dots_from_scan(const Scan& s, double prominence, double lo, double hi) {
  const auto scan = detail::find_extrema(s.xs, s.vs, prominence);
  const auto& ex = scan.confirmed;
  std::vector<std::size_t> wells;
  for (std::size_t i = 1; i < ex.size(); ++i) {
    if (!ex[i].is_max && ex[i - 1].is_max) wells.push_back(i);
  }
  if (wells.empty()) throw NoWellsError();
  std::vector<Interval> out;
  double left = lo;
  for (std::size_t w = 0; w < wells.size(); ++w) {
    double right = hi;
    if (w + 1 < wells.size()) {
      // The extrema alternate, so the barrier is the entry right after the well.
      right = ex[wells[w] + 1].x;
    }
    out.push_back({left, right});
    left = right;
  }
  return out;
}

}  // namespace

// SampledPotential -------------------------------------------------------------

SampledPotential::SampledPotential(std::vector<double> xs, std::vector<double> vs) {
  if (!all_finite(xs) || !all_finite(vs)) throw InvalidArgument("potential samples must be finite");
  spline_ = CubicSpline(xs, vs);
}

// PiecewisePotential ------------------------------------------------------------

PiecewisePotential::PiecewisePotential(std::vector<double> b, std::vector<double> s, std::vector<double> e,
                                       SegmentShape shape)
    : breakpoints_(std::move(b)), start_(std::move(s)), end_(std::move(e)), shape_(shape) {
  if (start_.empty() || breakpoints_.size() != start_.size() + 1 || end_.size() != start_.size()) {
    throw InvalidArgument("piecewise potential needs S+1 breakpoints for S >= 1 segments");
  }
  for (std::size_t i = 1; i < breakpoints_.size(); ++i) {
    if (!(breakpoints_[i] > breakpoints_[i - 1])) throw InvalidArgument("breakpoints must be strictly increasing");
  }
  if (!all_finite(breakpoints_) || !all_finite(start_) || !all_finite(end_)) {
    throw InvalidArgument("piecewise potential values must be finite");
  }
}

PiecewisePotential PiecewisePotential::constant(std::vector<double> breakpoints, std::vector<double> values) {
  std::vector<double> e = values;
  return PiecewisePotential(std::move(breakpoints), std::move(values), std::move(e), SegmentShape::constant);
}

PiecewisePotential PiecewisePotential::linear(std::vector<double> breakpoints, std::vector<double> start_values,
                                              std::vector<double> end_values) {
  return PiecewisePotential(std::move(breakpoints), std::move(start_values), std::move(end_values),
                            SegmentShape::linear);
}

double PiecewisePotential::height(std::size_t i) const { return std::max(start_[i], end_[i]); }

std::size_t PiecewisePotential::segment_at(double x) const {
  auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
  if (it == breakpoints_.begin()) return 0;
  const auto idx = static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
  return std::min(idx, segments() - 1);
}

double PiecewisePotential::evaluate(double x) const {
  const std::size_t i = segment_at(x);
  if (shape_ == SegmentShape::constant) return start_[i];
  const double a = breakpoints_[i];
  const double b = breakpoints_[i + 1];
  const double u = std::clamp((x - a) / (b - a), 0.0, 1.0);
  return start_[i] + (end_[i] - start_[i]) * u;
}

PiecewisePotential PiecewisePotential::shifted(std::size_t i, double delta) const {
  PiecewisePotential out = *this;
  out.start_.at(i) += delta;
  out.end_.at(i) += delta;
  return out;
}

std::vector<std::size_t> PiecewisePotential::barrier_segments() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i + 1 < segments(); ++i) {
    if (height(i) > height(i - 1) && height(i) > height(i + 1)) out.push_back(i);
  }
  return out;
}

// EmbeddedPotential --------------------------------------------------------------

namespace {

double extent_of(const InnerPotential& inner) {
  return std::visit(
      [](const auto& p) -> double {
        if constexpr (std::is_same_v<std::decay_t<decltype(p)>, std::monostate>) {
          return 0.0;
        } else {
          return p.extent();
        }
      },
      inner);
}

}  // namespace

EmbeddedPotential::EmbeddedPotential(InnerPotential inner, double margin_h, double total_length)
    : inner_(std::move(inner)), margin_h_(margin_h), length_(total_length) {
  const double extent = extent_of(inner_);
  if (!(total_length > 0) || !(margin_h >= 0) || !std::isfinite(total_length)) {
    throw InvalidArgument("embedding needs L > 0 and h >= 0");
  }
  if (total_length < extent + 2.0 * margin_h - 1e-9 * total_length) {
    throw InvalidArgument("well width L = " + std::to_string(total_length) + " smaller than inner extent " +
                          std::to_string(extent) + " plus two margins of " + std::to_string(margin_h));
  }
  inner_start_ = 0.5 * (total_length - extent);
}

double EmbeddedPotential::inner_extent() const { return extent_of(inner_); }

double EmbeddedPotential::shift() const {
  if (const auto* s = std::get_if<SampledPotential>(&inner_)) return inner_start_ - s->lo();
  if (const auto* p = std::get_if<PiecewisePotential>(&inner_)) return inner_start_ - p->lo();
  return inner_start_;
}

double EmbeddedPotential::left_plateau() const {
  if (const auto* s = std::get_if<SampledPotential>(&inner_)) return s->vs().front();
  if (const auto* p = std::get_if<PiecewisePotential>(&inner_)) return p->start_value(0);
  return 0.0;
}

double EmbeddedPotential::right_plateau() const {
  if (const auto* s = std::get_if<SampledPotential>(&inner_)) return s->vs().back();
  if (const auto* p = std::get_if<PiecewisePotential>(&inner_)) return p->end_value(p->segments() - 1);
  return 0.0;
}

double EmbeddedPotential::evaluate(double x) const {
  if (x < 0.0 || x > length_) return kInf;
  if (empty()) return 0.0;
  if (x < inner_start_) return left_plateau();
  if (x > inner_end()) return right_plateau();
  const double u = x - shift();
  if (const auto* s = std::get_if<SampledPotential>(&inner_)) return s->evaluate(u);
  return std::get<PiecewisePotential>(inner_).evaluate(u);
}

EmbeddedPotential embed_in_infinite_well(InnerPotential inner, double margin_h, double total_length) {
  return EmbeddedPotential(std::move(inner), margin_h, total_length);
}

// StepFunction ------------------------------------------------------------------

StepFunction::StepFunction(double initial, std::vector<std::pair<double, double>> switches)
    : initial_(initial), switches_(std::move(switches)) {
  if (!std::isfinite(initial_)) throw InvalidArgument("step function values must be finite");
  for (std::size_t i = 0; i < switches_.size(); ++i) {
    if (!std::isfinite(switches_[i].first) || !std::isfinite(switches_[i].second)) {
      throw InvalidArgument("step function values must be finite");
    }
    if (i > 0 && !(switches_[i].first > switches_[i - 1].first)) {
      throw InvalidArgument("step function switch times must be strictly increasing");
    }
  }
}

double StepFunction::value_at(double t) const {
  auto it = std::upper_bound(switches_.begin(), switches_.end(), t,
                             [](double tt, const std::pair<double, double>& s) { return tt < s.first; });
  if (it == switches_.begin()) return initial_;
  return std::prev(it)->second;
}

StepFunction rectangular_pulse(double base, double level, double start, double width) {
  if (!(width > 0)) throw InvalidArgument("pulse width must be positive");
  return StepFunction(base, {{start, level}, {start + width, base}});
}

// BarrierSchedule ---------------------------------------------------------------

BarrierSchedule::BarrierSchedule(EmbeddedPotential base, std::vector<Modulation> modulations)
    : base_(std::move(base)), modulations_(std::move(modulations)) {
  if (modulations_.empty()) return;
  const auto* pw = std::get_if<PiecewisePotential>(&base_.inner());
  if (pw == nullptr) throw InvalidArgument("barrier modulation requires a piecewise inner potential");
  std::set<std::size_t> seen;
  for (const Modulation& m : modulations_) {
    if (m.segment >= pw->segments()) throw InvalidArgument("modulated segment index out of range");
    if (!seen.insert(m.segment).second) throw InvalidArgument("segment modulated twice");
  }
}

double BarrierSchedule::evaluate(double x, double t) const {
  if (modulations_.empty() || x < base_.inner_start() || x > base_.inner_end()) return base_.evaluate(x);
  const auto& pw = std::get<PiecewisePotential>(base_.inner());
  const double u = x - base_.shift();
  const std::size_t seg = pw.segment_at(u);
  const double v = pw.evaluate(u);
  for (const Modulation& m : modulations_) {
    if (m.segment == seg) return v + m.height.value_at(t) - pw.height(seg);
  }
  return v;
}

EmbeddedPotential BarrierSchedule::at(double t) const {
  if (modulations_.empty()) return base_;
  PiecewisePotential pw = std::get<PiecewisePotential>(base_.inner());
  for (const Modulation& m : modulations_) pw = pw.shifted(m.segment, m.height.value_at(t) - pw.height(m.segment));
  return EmbeddedPotential(std::move(pw), base_.margin(), base_.length());
}

std::vector<double> BarrierSchedule::heights_at(double t) const {
  std::vector<double> h;
  heights_at(t, h);
  return h;
}

void BarrierSchedule::heights_at(double t, std::vector<double>& out) const {
  out.resize(modulations_.size());
  for (std::size_t i = 0; i < modulations_.size(); ++i) out[i] = modulations_[i].height.value_at(t);
}

std::vector<double> BarrierSchedule::switch_times_in(double a, double b) const {
  std::vector<double> out;
  for (const Modulation& m : modulations_) {
    for (const auto& [ts, v] : m.height.switches()) {
      if (ts > a && ts < b) out.push_back(ts);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Ingestion ---------------------------------------------------------------------

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool split_pair(std::string_view line, std::string_view& a, std::string_view& b) {
  const auto comma = line.find(',');
  if (comma == std::string_view::npos || line.find(',', comma + 1) != std::string_view::npos) return false;
  a = trim(line.substr(0, comma));
  b = trim(line.substr(comma + 1));
  return !a.empty() && !b.empty();
}

double parse_number(std::string_view s, std::size_t line) {
  double v = 0.0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw ParseError("not a number: '" + std::string(s) + "'", line);
  }
  return v;
}

}  // namespace

SampledPotential load_potential_table(std::istream& in, const UnitSystem& units) {
  std::string raw;
  std::size_t line_no = 0;
  bool have_header = false;
  std::string x_unit;
  std::string v_unit;
  std::vector<double> xs;
  std::vector<double> vs;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    std::string_view a;
    std::string_view b;
    if (!split_pair(line, a, b)) throw ParseError("expected two comma-separated fields", line_no);
    if (!have_header) {
      if (a != "nm" && a != "x0") throw ParseError("unit header missing or x unit not in {nm, x0}", line_no);
      if (b != "meV" && b != "ueV" && b != "E0") {
        throw ParseError("unit header missing or V unit not in {meV, ueV, E0}", line_no);
      }
      x_unit = a;
      v_unit = b;
      have_header = true;
      continue;
    }
    const double x = to_dimensionless(parse_number(a, line_no), x_unit, units);
    const double v = to_dimensionless(parse_number(b, line_no), v_unit, units);
    if (!xs.empty() && !(x > xs.back())) throw ParseError("x column is not strictly increasing", line_no);
    xs.push_back(x);
    vs.push_back(v);
  }
  if (!have_header) throw ParseError("unit header missing", line_no);
  if (xs.size() < 4) throw ParseError("potential table needs at least 4 rows", line_no);
  const double vmin = *std::min_element(vs.begin(), vs.end());
  for (double& v : vs) v -= vmin;
  return SampledPotential(std::move(xs), std::move(vs));
}

// Extrema -----------------------------------------------------------------------

namespace detail {

ExtremaScan find_extrema(std::span<const double> xs, std::span<const double> vs, double prominence) {
  ExtremaScan out;
  if (xs.empty()) return out;
  double scale = 1.0;
  for (double v : vs) scale = std::max(scale, std::abs(v));
  const double flat = 1e-12 * scale;

  enum class Seek { undetermined, max, min };
  Seek state = Seek::undetermined;
  Extremum mx{true, xs[0], vs[0], 0, 0};
  Extremum mn{false, xs[0], vs[0], 0, 0};

  auto centred = [&](Extremum e) {
    e.x = 0.5 * (xs[e.first] + xs[e.last]);
    return e;
  };
  auto update = [&](Extremum& e, std::size_t i, bool higher_is_better) {
    const double v = vs[i];
    const bool better = higher_is_better ? v > e.value + flat : v < e.value - flat;
    if (better) {
      e.value = v;
      e.first = e.last = i;
    } else if (std::abs(v - e.value) <= flat && e.last + 1 == i) {
      e.last = i;
    }
  };

  for (std::size_t i = 1; i < xs.size(); ++i) {
    const double v = vs[i];
    if (state != Seek::min) update(mx, i, true);
    if (state != Seek::max) update(mn, i, false);
    if (state == Seek::undetermined) {
      if (v < mx.value - prominence) {
        out.confirmed.push_back(centred(mx));
        state = Seek::min;
        mn = Extremum{false, xs[i], v, i, i};
      } else if (v > mn.value + prominence) {
        out.confirmed.push_back(centred(mn));
        state = Seek::max;
        mx = Extremum{true, xs[i], v, i, i};
      }
    } else if (state == Seek::min) {
      if (v > mn.value + prominence) {
        out.confirmed.push_back(centred(mn));
        state = Seek::max;
        mx = Extremum{true, xs[i], v, i, i};
      }
    } else {
      if (v < mx.value - prominence) {
        out.confirmed.push_back(centred(mx));
        state = Seek::min;
        mn = Extremum{false, xs[i], v, i, i};
      }
    }
  }
  if (state == Seek::max) {
    out.has_pending = true;
    out.pending = centred(mx);
  } else if (state == Seek::min) {
    out.has_pending = true;
    out.pending = centred(mn);
  }
  return out;
}

}  // namespace detail

// Approximation -----------------------------------------------------------------

namespace {

struct FineSegment {
  double lo;
  double hi;
  double start;
  double end;
  double deviation;
};

FineSegment fit_segment(double lo, double hi, const std::vector<double>& px, const std::vector<double>& pv,
                        const SampledPotential& p, SegmentShape shape) {
  const double flo = p.evaluate(lo);
  const double fhi = p.evaluate(hi);
  auto first = std::lower_bound(px.begin(), px.end(), lo);
  auto last = std::upper_bound(px.begin(), px.end(), hi);
  FineSegment s{lo, hi, 0.0, 0.0, 0.0};
  if (shape == SegmentShape::constant) {
    double vmin = std::min(flo, fhi);
    double vmax = std::max(flo, fhi);
    for (auto it = first; it != last; ++it) {
      const double v = pv[static_cast<std::size_t>(it - px.begin())];
      vmin = std::min(vmin, v);
      vmax = std::max(vmax, v);
    }
    s.start = s.end = 0.5 * (vmin + vmax);
    s.deviation = 0.5 * (vmax - vmin);
  } else {
    s.start = flo;
    s.end = fhi;
    double dev = 0.0;
    for (auto it = first; it != last; ++it) {
      const double x = *it;
      const double chord = flo + (fhi - flo) * (x - lo) / (hi - lo);
      dev = std::max(dev, std::abs(pv[static_cast<std::size_t>(it - px.begin())] - chord));
    }
    s.deviation = dev;
  }
  return s;
}

}  // namespace

PiecewisePotential approximate_piecewise(const SampledPotential& p, const ApproximationOptions& options) {
  const std::vector<double> px = oversampled_points(p);
  std::vector<double> pv(px.size());
  std::transform(px.begin(), px.end(), pv.begin(), [&p](double x) { return p.evaluate(x); });
  auto f = [&p](double x) { return p.evaluate(x); };

  const auto scan = detail::find_extrema(px, pv, options.prominence);
  std::vector<detail::Extremum> ex = scan.confirmed;
  if (scan.has_pending) ex.push_back(scan.pending);

  std::vector<double> cuts{p.lo()};
  for (std::size_t i = 0; i + 1 < ex.size(); ++i) cuts.push_back(half_level_crossing(px, pv, ex[i], ex[i + 1], f));
  cuts.push_back(p.hi());
  const std::size_t required = cuts.size() - 1;
  if (options.budget != 0 && options.budget < required) throw BudgetError(required, options.budget);

  if (options.mode == ApproximationMode::coarse) {
    std::vector<double> values;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      values.push_back(integrate_spline(p, cuts[i], cuts[i + 1]) / (cuts[i + 1] - cuts[i]));
    }
    return PiecewisePotential::constant(std::move(cuts), std::move(values));
  }

  std::vector<FineSegment> segs;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    segs.push_back(fit_segment(cuts[i], cuts[i + 1], px, pv, p, options.shape));
  }
  const std::size_t budget = options.budget == 0 ? 10000 : options.budget;
  while (segs.size() < budget) {
    auto worst = std::max_element(segs.begin(), segs.end(),
                                  [](const FineSegment& a, const FineSegment& b) { return a.deviation < b.deviation; });
    if (worst->deviation <= options.tolerance || worst->hi - worst->lo < 1e-9) break;
    const double mid = 0.5 * (worst->lo + worst->hi);
    const FineSegment left = fit_segment(worst->lo, mid, px, pv, p, options.shape);
    const FineSegment right = fit_segment(mid, worst->hi, px, pv, p, options.shape);
    *worst = right;
    segs.insert(worst, left);
  }

  std::vector<double> bps{segs.front().lo};
  std::vector<double> starts;
  std::vector<double> ends;
  for (const FineSegment& s : segs) {
    bps.push_back(s.hi);
    starts.push_back(s.start);
    ends.push_back(s.end);
  }
  if (options.shape == SegmentShape::constant) return PiecewisePotential::constant(std::move(bps), std::move(starts));
  return PiecewisePotential::linear(std::move(bps), std::move(starts), std::move(ends));
}

double max_deviation(const PiecewisePotential& approx, const SampledPotential& reference) {
  double dev = 0.0;
  for (double x : oversampled_points(reference)) {
    dev = std::max(dev, std::abs(approx.evaluate(x) - reference.evaluate(x)));
  }
  return dev;
}

// Evaluation --------------------------------------------------------------------

double evaluate(const SampledPotential& p, double x, double) { return p.evaluate(x); }
double evaluate(const PiecewisePotential& p, double x, double) { return p.evaluate(x); }
double evaluate(const EmbeddedPotential& p, double x, double) { return p.evaluate(x); }
double evaluate(const BarrierSchedule& p, double x, double t) { return p.evaluate(x, t); }

std::vector<double> sample_on_grid(const EmbeddedPotential& p, const Grid& grid, double wall_height) {
  std::vector<double> v(grid.n_points());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double x = grid.x(i);
    v[i] = (x < 0.0 || x > p.length()) ? wall_height : p.evaluate(x);
  }
  return v;
}

std::vector<double> sample_on_grid(const BarrierSchedule& p, const Grid& grid, double t, double wall_height) {
  return sample_on_grid(p.at(t), grid, wall_height);
}

EnergyEstimate energy_expectation(const WaveState& state, const EmbeddedPotential& p, double wall_height) {
  const auto v = sample_on_grid(p, state.grid, wall_height);
  return energy_expectation(state, v);
}

// Dot detection -----------------------------------------------------------------

std::vector<Interval> segment_dots(const EmbeddedPotential& p, double prominence) {
  Scan s;
  auto push = [&s, &p](double x) {
    s.xs.push_back(x);
    s.vs.push_back(p.evaluate(x));
  };
  if (p.inner_start() > 0.0) {
    for (int j = 0; j < 8; ++j) push(p.inner_start() * (j + 0.5) / 8.0);
  }
  const double shift = p.shift();
  if (const auto* sp = std::get_if<SampledPotential>(&p.inner())) {
    for (double u : oversampled_points(*sp)) push(u + shift);
  } else if (const auto* pw = std::get_if<PiecewisePotential>(&p.inner())) {
    for (double u : piecewise_sample_points(*pw)) push(u + shift);
  } else {
    for (int j = 0; j < 16; ++j) push(p.length() * (j + 0.5) / 16.0);
  }
  if (p.inner_end() < p.length()) {
    const double w = p.length() - p.inner_end();
    for (int j = 0; j < 8; ++j) push(p.inner_end() + w * (j + 0.5) / 8.0);
  }
  // Hard walls enter the scan as samples far above everything else.
  const double top = *std::max_element(s.vs.begin(), s.vs.end()) + 10.0 * prominence + 1.0;
  s.xs.insert(s.xs.begin(), 0.0);
  s.vs.insert(s.vs.begin(), top);
  s.xs.push_back(p.length());
  s.vs.push_back(top);
  return dots_from_scan(s, prominence, 0.0, p.length());
}

std::vector<Interval> segment_dots(const SampledPotential& p, double prominence) {
  Scan s;
  s.xs = oversampled_points(p);
  for (double x : s.xs) s.vs.push_back(p.evaluate(x));
  return dots_from_scan(s, prominence, p.lo(), p.hi());
}

std::vector<Interval> segment_dots(const PiecewisePotential& p, double prominence) {
  Scan s;
  s.xs = piecewise_sample_points(p);
  for (double x : s.xs) s.vs.push_back(p.evaluate(x));
  return dots_from_scan(s, prominence, p.lo(), p.hi());
}

}  // namespace qdsim
