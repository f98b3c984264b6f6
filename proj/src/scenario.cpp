#include "qdsim/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "qdsim/errors.hpp"
#include "qdsim/output.hpp"

namespace qdsim {

using nlohmann::json;

namespace {

// Config access -----------------------------------------------------------------

const json* find(const json& doc, const std::string& path) {
  const json* cur = &doc;
  std::size_t pos = 0;
  while (pos <= path.size()) {
    const std::size_t dot = path.find('.', pos);
    const std::string key = path.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
    if (!cur->is_object()) return nullptr;
    auto it = cur->find(key);
    if (it == cur->end()) return nullptr;
    cur = &*it;
    if (dot == std::string::npos) break;
    pos = dot + 1;
  }
  return cur;
}

bool has(const json& doc, const std::string& path) { return find(doc, path) != nullptr; }

const json& require(const json& doc, const std::string& path) {
  const json* j = find(doc, path);
  if (j == nullptr) throw ValidationError(path, "required field missing");
  return *j;
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ValidationError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ValidationError(path, "must be finite");
  return v;
}

std::size_t as_count(const json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 0) throw ValidationError(path, "expected a non-negative integer");
  return j.get<std::size_t>();
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ValidationError(path, "expected a string");
  return j.get<std::string>();
}

bool as_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) throw ValidationError(path, "expected true or false");
  return j.get<bool>();
}

/// Plain number (simulator units) or {"value": v, "unit": "ns"}.
double as_quantity(const json& j, const std::string& path, Quantity kind, const UnitSystem& units) {
  if (j.is_number()) return as_number(j, path);
  if (!j.is_object() || !j.contains("value") || !j.contains("unit")) {
    throw ValidationError(path, "expected a number or {\"value\", \"unit\"}");
  }
  const double v = as_number(j.at("value"), path + ".value");
  const std::string unit = as_string(j.at("unit"), path + ".unit");
  UnitLabel label{};
  try {
    label = parse_unit(unit);
  } catch (const InvalidArgument& e) {
    throw ValidationError(path + ".unit", e.what());
  }
  if (label.kind != kind) throw ValidationError(path + ".unit", "unit '" + unit + "' has the wrong dimension");
  return to_dimensionless(v, unit, units);
}

std::vector<double> as_quantity_list(const json& j, const std::string& path, const std::string& unit,
                                     const UnitSystem& units) {
  if (!j.is_array() || j.empty()) throw ValidationError(path, "expected a non-empty array");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(to_dimensionless(as_number(j[i], path + "." + std::to_string(i)), unit, units));
  }
  return out;
}

SolverKind parse_solver(const json& j) {
  const std::string s = as_string(j, "solver");
  if (s == "eigen") return SolverKind::eigen;
  if (s == "som") return SolverKind::som;
  if (s == "tb") return SolverKind::tb;
  if (s == "both") return SolverKind::both;
  throw ValidationError("solver", "expected eigen, som, tb or both");
}

std::string solver_name(const json& doc) {
  const json* s = find(doc, "solver");
  return (s != nullptr && s->is_string()) ? s->get<std::string>() : "";
}

}  // namespace

void apply_override(json& document, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ValidationError(assignment, "override must look like key.path=value");
  const std::string path = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  json* cur = &document;
  std::size_t pos = 0;
  while (true) {
    const std::size_t dot = path.find('.', pos);
    const std::string key = path.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
    if (key.empty()) throw ValidationError(path, "empty key in override path");
    if (cur->is_array()) {
      const std::size_t idx = std::stoul(key);
      if (idx >= cur->size()) throw ValidationError(path, "array index out of range");
      cur = &(*cur)[idx];
    } else {
      if (!cur->is_object()) *cur = json::object();
      cur = &(*cur)[key];
    }
    if (dot == std::string::npos) break;
    pos = dot + 1;
  }
  *cur = value;
}

std::vector<std::string> required_fields(const json& doc) {
  std::vector<std::string> req{"schema_version", "solver"};
  const std::string solver = solver_name(doc);
  const bool tb_without_potential = solver == "tb" && !has(doc, "potential");
  const bool needs_potential = solver == "eigen" || solver == "som" || solver == "both" ||
                               (solver == "tb" && !tb_without_potential);
  if (needs_potential) {
    req.insert(req.end(), {"potential", "potential.source", "embedding", "embedding.L", "eigen", "eigen.n_basis"});
    const json* src = find(doc, "potential.source");
    if (src != nullptr && src->is_string()) {
      if (*src == "table") req.emplace_back("potential.path");
      if (*src == "piecewise") req.insert(req.end(), {"potential.breakpoints", "potential.values"});
    }
  }
  if (solver == "som" || solver == "both") req.insert(req.end(), {"grid", "grid.n_points", "horizon"});
  if (solver == "tb") {
    req.emplace_back("horizon");
    if (tb_without_potential) req.insert(req.end(), {"tb", "tb.sites", "tb.t_low"});
  }
  if (has(doc, "noise")) {
    req.insert(req.end(), {"noise.barrier", "noise.v_min", "noise.v_max", "noise.mean_dwell", "noise.n_runs"});
  }
  return req;
}

ScenarioConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw ValidationError("(root)", "configuration must be a JSON object");
  for (const std::string& f : required_fields(doc)) require(doc, f);

  ScenarioConfig cfg;
  cfg.document = doc;
  cfg.base_dir = base_dir;
  if (as_count(doc.at("schema_version"), "schema_version") != 1) {
    throw ValidationError("schema_version", "only schema version 1 is supported");
  }
  cfg.solver = parse_solver(doc.at("solver"));
  if (const json* j = find(doc, "name")) cfg.name = as_string(*j, "name");

  if (const json* u = find(doc, "units")) {
    double x0_nm = 20.0;
    double m_eff = 1.08;
    if (const json* j = find(*u, "x0_nm")) x0_nm = as_number(*j, "units.x0_nm");
    if (const json* j = find(*u, "m_eff")) m_eff = as_number(*j, "units.m_eff");
    if (!(x0_nm > 0) || !(m_eff > 0)) throw ValidationError("units", "x0_nm and m_eff must be positive");
    cfg.units = UnitSystem::from(x0_nm * 1e-9, m_eff * UnitSystem::electron_mass);
  }
  const UnitSystem& u = cfg.units;

  // Potential.
  if (const json* pot = find(doc, "potential")) {
    const std::string src = as_string(require(doc, "potential.source"), "potential.source");
    if (src == "table") {
      cfg.source = PotentialSource::table;
      cfg.table_path = as_string(require(doc, "potential.path"), "potential.path");
      if (cfg.table_path.is_relative()) cfg.table_path = base_dir / cfg.table_path;
      if (const json* a = find(*pot, "approximation")) {
        const std::string mode = as_string(require(*a, "mode"), "potential.approximation.mode");
        if (mode != "none") {
          ApproximationOptions opt;
          if (mode == "coarse") opt.mode = ApproximationMode::coarse;
          else if (mode == "fine") opt.mode = ApproximationMode::fine;
          else throw ValidationError("potential.approximation.mode", "expected none, coarse or fine");
          if (const json* j = find(*a, "budget")) opt.budget = as_count(*j, "potential.approximation.budget");
          if (const json* j = find(*a, "tolerance")) {
            opt.tolerance = as_quantity(*j, "potential.approximation.tolerance", Quantity::energy, u);
          }
          if (const json* j = find(*a, "shape")) {
            const std::string s = as_string(*j, "potential.approximation.shape");
            if (s == "linear") opt.shape = SegmentShape::linear;
            else if (s != "constant") throw ValidationError("potential.approximation.shape", "expected constant or linear");
          }
          cfg.approximation = opt;
        }
      }
    } else if (src == "piecewise") {
      cfg.source = PotentialSource::piecewise;
      std::string xu = "x0";
      std::string vu = "E0";
      if (const json* j = find(*pot, "x_unit")) xu = as_string(*j, "potential.x_unit");
      if (const json* j = find(*pot, "v_unit")) vu = as_string(*j, "potential.v_unit");
      try {
        if (parse_unit(xu).kind != Quantity::length) throw InvalidArgument("not a length unit");
      } catch (const InvalidArgument& e) {
        throw ValidationError("potential.x_unit", e.what());
      }
      try {
        if (parse_unit(vu).kind != Quantity::energy) throw InvalidArgument("not an energy unit");
      } catch (const InvalidArgument& e) {
        throw ValidationError("potential.v_unit", e.what());
      }
      auto bps = as_quantity_list(doc.at("potential").at("breakpoints"), "potential.breakpoints", xu, u);
      auto vals = as_quantity_list(doc.at("potential").at("values"), "potential.values", vu, u);
      try {
        cfg.piecewise = PiecewisePotential::constant(std::move(bps), std::move(vals));
      } catch (const InvalidArgument& e) {
        throw ValidationError("potential", e.what());
      }
    } else {
      throw ValidationError("potential.source", "expected table or piecewise");
    }
  }

  if (const json* e = find(doc, "embedding")) {
    if (const json* j = find(*e, "L")) cfg.L = as_quantity(*j, "embedding.L", Quantity::length, u);
    if (const json* j = find(*e, "h")) cfg.margin_h = as_quantity(*j, "embedding.h", Quantity::length, u);
    if (const json* j = find(*e, "wall_height")) {
      cfg.wall_height = as_quantity(*j, "embedding.wall_height", Quantity::energy, u);
    }
  }
  if (const json* j = find(doc, "grid.n_points")) {
    cfg.n_points = as_count(*j, "grid.n_points");
    if (cfg.n_points < 4 || !is_power_of_two(cfg.n_points)) {
      throw ValidationError("grid.n_points", "must be a power of 2 (>= 4)");
    }
  }
  if (const json* e = find(doc, "eigen")) {
    if (const json* j = find(*e, "n_basis")) {
      cfg.n_basis = as_count(*j, "eigen.n_basis");
      if (cfg.n_basis < 1) throw ValidationError("eigen.n_basis", "must be at least 1");
    }
    if (const json* j = find(*e, "bound_threshold")) {
      cfg.bound_threshold = as_quantity(*j, "eigen.bound_threshold", Quantity::energy, u);
    }
    if (const json* j = find(*e, "export_states")) cfg.export_states = as_count(*j, "eigen.export_states");
    if (const json* j = find(*e, "compare_approximations")) {
      cfg.compare_approximations = as_bool(*j, "eigen.compare_approximations");
      if (cfg.compare_approximations && cfg.source != PotentialSource::table) {
        throw ValidationError("eigen.compare_approximations", "needs a table potential");
      }
    }
    if (const json* j = find(*e, "fine_budget")) cfg.fine_options.budget = as_count(*j, "eigen.fine_budget");
    if (const json* j = find(*e, "fine_tolerance")) {
      cfg.fine_options.tolerance = as_quantity(*j, "eigen.fine_tolerance", Quantity::energy, u);
    }
  }

  if (const json* j = find(doc, "initial_dot")) {
    cfg.initial_dot = as_count(*j, "initial_dot");
    if (cfg.initial_dot < 1) throw ValidationError("initial_dot", "dots are numbered from 1");
  }
  if (const json* j = find(doc, "target_dots")) {
    if (!j->is_array()) throw ValidationError("target_dots", "expected an array of dot numbers");
    for (std::size_t i = 0; i < j->size(); ++i) {
      const std::size_t d = as_count((*j)[i], "target_dots." + std::to_string(i));
      if (d < 1) throw ValidationError("target_dots." + std::to_string(i), "dots are numbered from 1");
      cfg.target_dots.push_back(d);
    }
  }
  if (const json* j = find(doc, "horizon")) {
    if (j->is_object() && j->contains("after_last_pulse")) {
      cfg.horizon_after_pulses = as_quantity(j->at("after_last_pulse"), "horizon.after_last_pulse", Quantity::time, u);
    } else {
      cfg.horizon = as_quantity(*j, "horizon", Quantity::time, u);
      if (!(*cfg.horizon > 0)) throw ValidationError("horizon", "must be positive");
    }
  }
  if (const json* j = find(doc, "dt")) {
    cfg.dt = as_quantity(*j, "dt", Quantity::time, u);
    if (!(cfg.dt > 0)) throw ValidationError("dt", "must be positive");
  }
  if (const json* j = find(doc, "record_stride")) {
    cfg.record_stride = as_count(*j, "record_stride");
    if (cfg.record_stride < 1) throw ValidationError("record_stride", "must be at least 1");
  }
  if (const json* j = find(doc, "heatmap")) cfg.heatmap = as_bool(*j, "heatmap");

  if (const json* pulses = find(doc, "pulses")) {
    if (!pulses->is_array()) throw ValidationError("pulses", "expected an array");
    for (std::size_t i = 0; i < pulses->size(); ++i) {
      const std::string p = "pulses." + std::to_string(i);
      const json& pj = (*pulses)[i];
      if (!pj.is_object()) throw ValidationError(p, "expected an object");
      PulseSpec ps;
      if (pj.contains("barrier")) {
        ps.barrier = as_count(pj.at("barrier"), p + ".barrier");
      } else if (pj.contains("link")) {
        const json& l = pj.at("link");
        if (!l.is_array() || l.size() != 2) throw ValidationError(p + ".link", "expected [j, k]");
        const std::size_t a = as_count(l[0], p + ".link.0");
        const std::size_t b = as_count(l[1], p + ".link.1");
        if (std::max(a, b) - std::min(a, b) != 1) throw ValidationError(p + ".link", "sites must be adjacent");
        ps.barrier = std::min(a, b);
      } else {
        throw ValidationError(p + ".barrier", "required field missing");
      }
      if (ps.barrier < 1) throw ValidationError(p + ".barrier", "barriers are numbered from 1");
      if (pj.contains("level")) ps.level = as_quantity(pj.at("level"), p + ".level", Quantity::energy, u);
      if (pj.contains("t_high")) ps.t_high = as_quantity(pj.at("t_high"), p + ".t_high", Quantity::energy, u);
      if (!pj.contains("t_start")) throw ValidationError(p + ".t_start", "required field missing");
      const json& ts = pj.at("t_start");
      if (ts.is_object() && ts.contains("after_previous")) {
        ps.gap = as_quantity(ts.at("after_previous"), p + ".t_start.after_previous", Quantity::time, u);
      } else {
        ps.t_start = as_quantity(ts, p + ".t_start", Quantity::time, u);
      }
      if (!pj.contains("width")) throw ValidationError(p + ".width", "required field missing");
      const json& w = pj.at("width");
      if (w.is_object() && w.contains("gate")) {
        const std::string g = as_string(w.at("gate"), p + ".width.gate");
        if (g == "transport") ps.gate = GateKind::transport;
        else if (g == "half-split") ps.gate = GateKind::half_split;
        else throw ValidationError(p + ".width.gate", "expected transport or half-split");
        if (w.contains("k")) {
          if (!w.at("k").is_number_integer()) throw ValidationError(p + ".width.k", "expected an integer");
          ps.repeats = w.at("k").get<int>();
          if (ps.repeats < 0) throw ValidationError(p + ".width.k", "must be non-negative");
        }
      } else {
        ps.width = as_quantity(w, p + ".width", Quantity::time, u);
        if (!(ps.width > 0)) throw ValidationError(p + ".width", "must be positive");
      }
      const bool som = cfg.solver == SolverKind::som || cfg.solver == SolverKind::both;
      if (som && !ps.level) throw ValidationError(p + ".level", "required for SOM pulses");
      if (cfg.source == PotentialSource::none && !ps.t_high) {
        throw ValidationError(p + ".t_high", "required without a potential to calibrate from");
      }
      cfg.pulses.push_back(ps);
    }
  }
  if (!cfg.horizon && cfg.pulses.empty() &&
      (cfg.solver == SolverKind::som || cfg.solver == SolverKind::both || cfg.solver == SolverKind::tb)) {
    throw ValidationError("horizon", "after_last_pulse needs at least one pulse");
  }

  if (const json* tb = find(doc, "tb")) {
    if (const json* j = find(*tb, "sites")) {
      cfg.tb_sites = as_count(*j, "tb.sites");
      if (*cfg.tb_sites < 1) throw ValidationError("tb.sites", "must be at least 1");
    }
    if (const json* j = find(*tb, "t_low")) {
      if (j->is_array()) {
        std::vector<double> v;
        for (std::size_t i = 0; i < j->size(); ++i) {
          v.push_back(as_quantity((*j)[i], "tb.t_low." + std::to_string(i), Quantity::energy, u));
        }
        cfg.tb_t_low = v;
      } else if (!(j->is_string() && *j == "calibrate")) {
        cfg.tb_t_low = std::vector<double>{as_quantity(*j, "tb.t_low", Quantity::energy, u)};
      }
    }
    if (const json* j = find(*tb, "record_dt")) {
      cfg.tb_record_dt = as_quantity(*j, "tb.record_dt", Quantity::time, u);
      if (!(*cfg.tb_record_dt > 0)) throw ValidationError("tb.record_dt", "must be positive");
    }
  }

  if (const json* n = find(doc, "noise")) {
    NoiseSpec ns;
    ns.barrier = as_count(n->at("barrier"), "noise.barrier");
    ns.v_min = as_quantity(n->at("v_min"), "noise.v_min", Quantity::energy, u);
    ns.v_max = as_quantity(n->at("v_max"), "noise.v_max", Quantity::energy, u);
    ns.mean_dwell = as_quantity(n->at("mean_dwell"), "noise.mean_dwell", Quantity::time, u);
    ns.n_runs = as_count(n->at("n_runs"), "noise.n_runs");
    if (const json* j = find(*n, "start_high")) ns.start_high = as_bool(*j, "noise.start_high");
    if (const json* j = find(*n, "threads")) ns.threads = as_count(*j, "noise.threads");
    if (ns.barrier < 1) throw ValidationError("noise.barrier", "barriers are numbered from 1");
    if (!(ns.v_max >= ns.v_min)) throw ValidationError("noise.v_max", "must be >= v_min");
    if (!(ns.mean_dwell > 0)) throw ValidationError("noise.mean_dwell", "must be positive");
    if (ns.n_runs < 2) throw ValidationError("noise.n_runs", "at least 2 runs are needed for a confidence interval");
    if (cfg.solver != SolverKind::som) throw ValidationError("noise", "noise ensembles run with solver som");
    cfg.noise = ns;
  }

  if (const json* o = find(doc, "output")) {
    if (const json* j = find(*o, "dir")) cfg.output.dir = as_string(*j, "output.dir");
    if (const json* j = find(*o, "formats")) {
      if (!j->is_array()) throw ValidationError("output.formats", "expected an array");
      cfg.output.csv = cfg.output.svg = cfg.output.json = false;
      for (std::size_t i = 0; i < j->size(); ++i) {
        const std::string f = as_string((*j)[i], "output.formats." + std::to_string(i));
        if (f == "csv") cfg.output.csv = true;
        else if (f == "svg") cfg.output.svg = true;
        else if (f == "json") cfg.output.json = true;
        else throw ValidationError("output.formats." + std::to_string(i), "expected csv, svg or json");
      }
    }
    if (const json* j = find(*o, "svg_width")) cfg.output.svg_width = static_cast<int>(as_count(*j, "output.svg_width"));
    if (const json* j = find(*o, "svg_height")) cfg.output.svg_height = static_cast<int>(as_count(*j, "output.svg_height"));
    if (cfg.output.svg_width < 100 || cfg.output.svg_height < 100) {
      throw ValidationError("output.svg_width", "SVG dimensions must be at least 100");
    }
  }
  if (const json* j = find(doc, "seed")) {
    if (!j->is_number_unsigned() && !(j->is_number_integer() && j->get<long long>() >= 0)) {
      throw ValidationError("seed", "expected a non-negative integer");
    }
    cfg.seed = j->get<std::uint64_t>();
  }
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ValidationError("--config", "cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ValidationError("--config", std::string("invalid JSON in ") + path.string() + ": " + e.what());
  }
  for (const auto& o : overrides) apply_override(doc, o);
  return parse_config(doc, path.has_parent_path() ? path.parent_path() : std::filesystem::path("."));
}

json RunReport::to_json() const {
  json j;
  j["config"] = config;
  if (n_bound) j["eigen"] = {{"n_bound", *n_bound}, {"lowest_energies_E0", lowest_energies}};
  j["traces"] = traces;
  j["histogram"] = histogram;
  j["residual"] = residual;
  j["timings_ms"] = timings_ms;
  j["sha256"] = hashes;
  j["details"] = details;
  return j;
}

// Pipeline ----------------------------------------------------------------------

namespace {

class StageTimer {
 public:
  StageTimer(RunReport& report, std::string name)
      : report_(report), name_(std::move(name)), start_(std::chrono::steady_clock::now()) {}
  ~StageTimer() {
    const auto d = std::chrono::steady_clock::now() - start_;
    report_.timings_ms[name_] += std::chrono::duration<double, std::milli>(d).count();
  }

 private:
  RunReport& report_;
  std::string name_;
  std::chrono::steady_clock::time_point start_;
};

std::vector<std::vector<double>> transpose(const std::vector<std::vector<double>>& m) {
  if (m.empty()) return {};
  std::vector<std::vector<double>> t(m.front().size(), std::vector<double>(m.size()));
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m[i].size(); ++j) t[j][i] = m[i][j];
  return t;
}

std::vector<PlotSeries> dot_series(const std::vector<double>& times, const std::vector<std::vector<double>>& probs,
                                   const std::string& prefix, bool markers) {
  std::vector<PlotSeries> out;
  const auto cols = transpose(probs);
  for (std::size_t d = 0; d < cols.size(); ++d) {
    out.push_back(PlotSeries{prefix + "dot " + std::to_string(d + 1), times, cols[d], {}, markers});
  }
  return out;
}

std::string spectrum_string(const EigenSolution& sol) {
  std::ostringstream s;
  write_spectrum_csv(s, sol);
  return s.str();
}

/// Inner segment carrying barrier `b` (1-based) between dots b and b+1.
std::size_t barrier_segment(const EmbeddedPotential& p, const std::vector<Interval>& dots, std::size_t b,
                            const std::string& field) {
  const auto* pw = std::get_if<PiecewisePotential>(&p.inner());
  if (pw == nullptr) throw ValidationError(field, "barrier pulses need a piecewise potential (set potential.approximation)");
  if (b < 1 || b >= dots.size()) {
    throw ValidationError(field, "barrier " + std::to_string(b) + " does not exist (" + std::to_string(dots.size()) +
                                     " dots)");
  }
  return pw->segment_at(dots[b - 1].hi - p.shift());
}

struct Pipeline {
  const ScenarioConfig& cfg;
  ScenarioResult& res;
  std::string* stage;

  std::optional<EmbeddedPotential> embedded;
  std::optional<SampledPotential> table;
  BasisSpec basis;
  std::optional<Grid> grid;
  std::optional<LocalizedBasis> localized;
  std::vector<double> t_low;
  double horizon = 0.0;

  void enter(const std::string& s) {
    if (stage) *stage = s;
  }

  PlotLayout layout(const std::string& title, const std::string& xl, const std::string& yl) const {
    return PlotLayout{cfg.output.svg_width, cfg.output.svg_height, title, xl, yl};
  }

  void build_potential() {
    enter("potential");
    StageTimer t(res.report, "potential");
    InnerPotential inner;
    if (cfg.source == PotentialSource::table) {
      std::ifstream in(cfg.table_path);
      if (!in) throw ValidationError("potential.path", "cannot open " + cfg.table_path.string());
      table = load_potential_table(in, cfg.units);
      if (cfg.approximation) {
        const PiecewisePotential pw = approximate_piecewise(*table, *cfg.approximation);
        res.report.details["approximation"] = {{"segments", pw.segments()},
                                               {"max_deviation_E0", max_deviation(pw, *table)}};
        inner = pw;
      } else {
        inner = *table;
      }
    } else if (cfg.source == PotentialSource::piecewise) {
      inner = *cfg.piecewise;
    }
    if (cfg.source == PotentialSource::none) return;
    try {
      embedded = embed_in_infinite_well(inner, cfg.margin_h, *cfg.L);
    } catch (const ValidationError&) {
      throw;
    } catch (const InvalidArgument& e) {
      throw ValidationError("embedding.L", e.what());
    }
    basis = BasisSpec{cfg.n_basis, *cfg.L};
    grid = Grid(cfg.n_points, *cfg.L, 0.0);
  }

  void solve_eigen() {
    enter("eigen");
    StageTimer t(res.report, "eigen");
    res.eigen = solve_bound_states(*embedded, basis, cfg.bound_threshold);
    const EigenSolution& sol = *res.eigen;
    res.report.n_bound = sol.n_bound;
    for (Eigen::Index n = 0; n < std::min<Eigen::Index>(10, sol.energies.size()); ++n) {
      res.report.lowest_energies.push_back(sol.energies(n));
    }
    res.report.details["bound_threshold_E0"] = sol.bound_threshold;
    try {
      res.dots = segment_dots(*embedded);
    } catch (const NoWellsError&) {
      if (cfg.solver != SolverKind::eigen) throw;
    }
    json dots = json::array();
    for (const Interval& d : res.dots) dots.push_back({d.lo, d.hi});
    res.report.details["dots_x0"] = dots;
  }

  void eigen_outputs() {
    enter("eigen-output");
    const EigenSolution& sol = *res.eigen;
    res.files["spectrum.csv"] = spectrum_string(sol);
    const std::size_t n_export = std::min(cfg.export_states, sol.n_bound);
    std::vector<PlotSeries> levels;
    const auto xs = grid->coordinates();
    const auto v = sample_on_grid(*embedded, *grid, cfg.wall_height);
    std::vector<double> vclip(v.size());
    const double top = n_export > 0 ? 1.5 * sol.energies(static_cast<Eigen::Index>(n_export - 1)) + 1.0 : 10.0;
    std::transform(v.begin(), v.end(), vclip.begin(), [top](double x) { return std::min(x, top); });
    levels.push_back(PlotSeries{"V(x)", xs, vclip, {}, false});
    for (std::size_t n = 0; n < n_export; ++n) {
      const WaveState psi = reconstruct_wavefunction(sol, n, *grid);
      std::ostringstream s;
      write_wavefunction_csv(s, psi);
      res.files["psi_" + std::to_string(n) + ".csv"] = s.str();
      const double e = sol.energies(static_cast<Eigen::Index>(n));
      const auto d = density(psi);
      std::vector<double> y(d.size());
      const double dmax = std::max(1e-300, *std::max_element(d.begin(), d.end()));
      const double scale = 0.4 * (top / static_cast<double>(n_export + 1));
      for (std::size_t i = 0; i < d.size(); ++i) y[i] = e + scale * d[i] / dmax;
      levels.push_back(PlotSeries{"n=" + std::to_string(n), xs, y, {}, false});
    }
    res.files["levels.svg"] = svg_lines(levels, layout("Bound states", "x [x0]", "E [E0]"));

    if (cfg.compare_approximations) {
      enter("approximation-comparison");
      StageTimer t(res.report, "approximation_comparison");
      ApproximationOptions coarse;
      coarse.mode = ApproximationMode::coarse;
      const PiecewisePotential pc = approximate_piecewise(*table, coarse);
      const PiecewisePotential pf = approximate_piecewise(*table, cfg.fine_options);
      const auto spline_sol =
          solve_bound_states(embed_in_infinite_well(*table, cfg.margin_h, *cfg.L), basis, cfg.bound_threshold);
      const auto coarse_sol =
          solve_bound_states(embed_in_infinite_well(pc, cfg.margin_h, *cfg.L), basis, cfg.bound_threshold);
      const auto fine_sol =
          solve_bound_states(embed_in_infinite_well(pf, cfg.margin_h, *cfg.L), basis, cfg.bound_threshold);
      auto maxdiff = [&](const EigenSolution& a) {
        return (a.energies.head(6) - spline_sol.energies.head(6)).cwiseAbs().maxCoeff();
      };
      res.files["spectrum_spline.csv"] = spectrum_string(spline_sol);
      res.files["spectrum_coarse.csv"] = spectrum_string(coarse_sol);
      res.files["spectrum_fine.csv"] = spectrum_string(fine_sol);
      res.report.details["approximation_comparison"] = {
          {"coarse_segments", pc.segments()},
          {"fine_segments", pf.segments()},
          {"coarse_max_abs_diff_lowest6_E0", maxdiff(coarse_sol)},
          {"fine_max_abs_diff_lowest6_E0", maxdiff(fine_sol)},
          {"n_bound_spline", spline_sol.n_bound},
          {"n_bound_coarse", coarse_sol.n_bound},
          {"n_bound_fine", fine_sol.n_bound}};
      std::vector<PlotSeries> pots;
      const auto xs2 = grid->coordinates();
      auto curve = [&](const std::string& label, const EmbeddedPotential& p) {
        const auto vv = sample_on_grid(p, *grid, cfg.wall_height);
        return PlotSeries{label, xs2, vv, {}, false};
      };
      pots.push_back(curve("spline", embed_in_infinite_well(*table, cfg.margin_h, *cfg.L)));
      pots.push_back(curve("coarse", embed_in_infinite_well(pc, cfg.margin_h, *cfg.L)));
      pots.push_back(curve("fine", embed_in_infinite_well(pf, cfg.margin_h, *cfg.L)));
      res.files["approximations.svg"] = svg_lines(pots, layout("Potential approximations", "x [x0]", "V [E0]"));
    }
  }

  void localize() {
    enter("localize");
    StageTimer t(res.report, "localize");
    if (cfg.initial_dot > res.dots.size()) {
      throw ValidationError("initial_dot", "only " + std::to_string(res.dots.size()) + " dots in the potential");
    }
    localized = localized_states(*res.eigen, res.dots, *grid);
    const Eigen::MatrixXd heff = effective_hamiltonian(*localized);
    t_low.clear();
    for (Eigen::Index l = 0; l + 1 < heff.rows(); ++l) t_low.push_back(std::abs(heff(l, l + 1)));
    json loc = json::array();
    for (const WaveState& s : localized->states) loc.push_back(dot_probabilities(s, res.dots));
    res.report.details["localized_dot_weights"] = loc;
    res.report.details["t_low_calibrated_E0"] = t_low;
  }

  double calibrate_t_high(std::size_t b, double level, const std::string& field) {
    const std::size_t seg = barrier_segment(*embedded, res.dots, b, field);
    const auto& pw = std::get<PiecewisePotential>(embedded->inner());
    const EmbeddedPotential lowered(pw.shifted(seg, level - pw.height(seg)), embedded->margin(), embedded->length());
    const EigenSolution sol = solve_bound_states(lowered, basis, cfg.bound_threshold);
    std::vector<std::size_t> pair;
    const std::size_t limit = std::min(sol.n_bound, res.dots.size() + 4);
    for (std::size_t n = 0; n < limit && pair.size() < 2; ++n) {
      const auto p = dot_probabilities(reconstruct_wavefunction(sol, n, *grid), res.dots);
      if (p[b - 1] + p[b] > 0.8) pair.push_back(n);
    }
    if (pair.size() < 2) {
      throw CalibrationError("no tunnelling doublet found for barrier " + std::to_string(b) + " at level " +
                             std::to_string(level) + " E0");
    }
    return hopping_from_splitting(sol, pair[0], pair[1]);
  }

  void resolve_pulses() {
    enter("pulses");
    StageTimer t(res.report, "pulses");
    std::map<std::pair<std::size_t, double>, double> cache;
    double prev_end = 0.0;
    json out = json::array();
    for (std::size_t i = 0; i < cfg.pulses.size(); ++i) {
      const PulseSpec& ps = cfg.pulses[i];
      const std::string field = "pulses." + std::to_string(i);
      ResolvedPulse rp;
      rp.barrier = ps.barrier;
      rp.level = ps.level.value_or(std::nan(""));
      const std::size_t n_sites = embedded ? res.dots.size() : cfg.tb_sites.value_or(0);
      if (ps.barrier >= n_sites) throw ValidationError(field + ".barrier", "no such barrier/link");
      if (ps.t_high) {
        rp.t_high = *ps.t_high;
      } else {
        const auto key = std::make_pair(ps.barrier, *ps.level);
        auto it = cache.find(key);
        if (it == cache.end()) it = cache.emplace(key, calibrate_t_high(ps.barrier, *ps.level, field)).first;
        rp.t_high = it->second;
      }
      rp.t_low = t_low.empty() ? 0.0 : t_low[ps.barrier - 1];
      rp.width = ps.gate ? gate_pulse_width(*ps.gate, rabi_period(rp.t_high), ps.repeats) : ps.width;
      rp.t_start = ps.t_start ? *ps.t_start : prev_end + ps.gap;
      prev_end = rp.t_start + rp.width;
      res.pulses.push_back(rp);
      json pj = {{"barrier", rp.barrier}, {"t_high_E0", rp.t_high}, {"t_low_E0", rp.t_low},
                 {"T0_t0", rp.t_high > 0 ? rabi_period(rp.t_high) : 0.0}, {"t_start_t0", rp.t_start},
                 {"width_t0", rp.width}};
      if (ps.level) pj["level_E0"] = *ps.level;
      out.push_back(pj);
    }
    res.report.details["pulses"] = out;
    horizon = cfg.horizon ? *cfg.horizon : prev_end + cfg.horizon_after_pulses;
    res.report.details["horizon_t0"] = horizon;
  }

  BarrierSchedule som_schedule() const {
    std::map<std::size_t, std::vector<const ResolvedPulse*>> by_barrier;
    for (const ResolvedPulse& p : res.pulses) by_barrier[p.barrier].push_back(&p);
    const auto& pw = std::get<PiecewisePotential>(embedded->inner());
    std::vector<Modulation> mods;
    for (auto& [b, list] : by_barrier) {
      const std::size_t seg = barrier_segment(*embedded, res.dots, b, "pulses");
      std::sort(list.begin(), list.end(), [](auto* a, auto* c) { return a->t_start < c->t_start; });
      const double base = pw.height(seg);
      std::vector<std::pair<double, double>> sw;
      double last_end = -std::numeric_limits<double>::infinity();
      for (const ResolvedPulse* p : list) {
        if (p->t_start < last_end) throw ValidationError("pulses", "overlapping pulses on barrier " + std::to_string(b));
        if (!sw.empty() && sw.back().first == p->t_start) {
          sw.back().second = p->level;
        } else {
          sw.emplace_back(p->t_start, p->level);
        }
        sw.emplace_back(p->t_start + p->width, base);
        last_end = p->t_start + p->width;
      }
      mods.push_back(Modulation{seg, StepFunction(base, std::move(sw))});
    }
    return BarrierSchedule(*embedded, std::move(mods));
  }

  PropagatorConfig propagator(bool snapshots) const {
    PropagatorConfig pc;
    pc.dt = cfg.dt;
    pc.n_steps = static_cast<std::size_t>(std::llround(horizon / cfg.dt));
    pc.record_stride = cfg.record_stride;
    pc.wall_height = cfg.wall_height;
    pc.keep_snapshots = snapshots;
    return pc;
  }

  void set_histogram(const std::vector<double>& final_probs) {
    res.report.histogram = final_probs;
    double all = 0.0;
    for (double p : final_probs) all += p;
    double hit = all;
    if (!cfg.target_dots.empty()) {
      hit = 0.0;
      for (std::size_t d : cfg.target_dots) {
        if (d > final_probs.size()) {
          throw ValidationError("target_dots", "only " + std::to_string(final_probs.size()) + " dots");
        }
        hit += final_probs[d - 1];
      }
      res.report.details["target_dots"] = cfg.target_dots;
    }
    res.report.residual = 1.0 - hit;
    res.report.details["outside_all_dots"] = 1.0 - all;
  }

  void run_som() {
    enter("som");
    StageTimer t(res.report, "som");
    const BarrierSchedule schedule = som_schedule();
    WaveState psi0 = localized->states[cfg.initial_dot - 1];
    const bool snaps = cfg.heatmap && (cfg.output.csv || cfg.output.svg);
    res.som = evolve(psi0, schedule, propagator(snaps), res.dots);
    const EvolutionTrace& tr = *res.som;
    res.files["som_probs.csv"] = probabilities_csv(tr.times, tr.dot_probs);
    res.files["som_probs.svg"] =
        svg_lines(dot_series(tr.times, tr.dot_probs, "", false), layout("Dot occupation (SOM)", "t [t0]", "P"));
    if (snaps) {
      const std::size_t every = std::max<std::size_t>(1, (tr.snapshots.size() + 399) / 400);
      std::vector<double> ht;
      std::vector<std::vector<double>> rows;
      for (std::size_t i = 0; i < tr.snapshots.size(); i += every) {
        ht.push_back(tr.times[i]);
        rows.push_back(tr.snapshots[i]);
      }
      res.files["heatmap.csv"] = heatmap_csv(ht, grid->coordinates(), rows);
      res.files["heatmap.svg"] = svg_heatmap(ht, grid->coordinates(), rows, layout("|psi|^2", "x [x0]", "t [t0]"));
      res.som->snapshots.clear();
    }
    double max_norm_err = 0.0;
    for (double n : tr.norm_series) max_norm_err = std::max(max_norm_err, std::abs(n - 1.0));
    res.report.details["som_max_norm_error"] = max_norm_err;
    set_histogram(tr.dot_probs.back());
  }

  void run_tb(double record_dt) {
    enter("tb");
    StageTimer t(res.report, "tb");
    const std::size_t n_sites = embedded ? res.dots.size() : *cfg.tb_sites;
    std::vector<double> links(n_sites - 1, 0.0);
    if (cfg.tb_t_low) {
      const auto& v = *cfg.tb_t_low;
      if (v.size() == 1) std::fill(links.begin(), links.end(), v[0]);
      else if (v.size() == links.size()) links = v;
      else throw ValidationError("tb.t_low", "give one value or one per link");
    } else {
      links = t_low;
    }
    std::vector<Pulse> pulses;
    for (ResolvedPulse& rp : res.pulses) {
      rp.t_low = links[rp.barrier - 1];
      pulses.push_back(Pulse{rp.barrier - 1, rp.barrier, rp.t_low, std::max(rp.t_high, rp.t_low), rp.t_start, rp.width});
    }
    const TBSchedule schedule(n_sites, links, pulses);
    Eigen::VectorXcd c0 = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(n_sites));
    if (cfg.initial_dot > n_sites) throw ValidationError("initial_dot", "no such site");
    c0(static_cast<Eigen::Index>(cfg.initial_dot - 1)) = 1.0;
    res.tb = propagate(c0, schedule, horizon, record_dt);
    std::ostringstream a;
    write_amplitudes_csv(a, *res.tb);
    res.files["tb_amplitudes.csv"] = a.str();
    std::ostringstream p;
    write_tb_probabilities_csv(p, *res.tb);
    res.files["tb_probs.csv"] = p.str();
    std::vector<std::vector<double>> probs;
    for (std::size_t r = 0; r < res.tb->times.size(); ++r) probs.push_back(res.tb->probabilities(r));
    res.files["tb_probs.svg"] =
        svg_lines(dot_series(res.tb->times, probs, "", false), layout("Dot occupation (tight binding)", "t [t0]", "P"));
    res.report.details["tb_link_hopping_E0"] = links;
    if (cfg.solver == SolverKind::tb) set_histogram(probs.back());
  }

  void compare() {
    enter("compare");
    const EvolutionTrace& som = *res.som;
    const AmplitudeTrace& tb = *res.tb;
    Comparison c;
    const std::size_t n = std::min(som.times.size(), tb.times.size());
    const std::size_t nd = res.dots.size();
    c.max_deviation.assign(nd, 0.0);
    c.rms_deviation.assign(nd, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      c.times.push_back(som.times[i]);
      c.som.push_back(som.dot_probs[i]);
      c.tb.push_back(tb.probabilities(i));
      for (std::size_t d = 0; d < nd; ++d) {
        const double diff = std::abs(c.som.back()[d] - c.tb.back()[d]);
        c.max_deviation[d] = std::max(c.max_deviation[d], diff);
        c.rms_deviation[d] += diff * diff;
      }
    }
    for (double& r : c.rms_deviation) r = std::sqrt(r / static_cast<double>(std::max<std::size_t>(n, 1)));
    std::ostringstream s;
    s.precision(12);
    s << 't';
    for (std::size_t d = 1; d <= nd; ++d) s << ",som_p" << d;
    for (std::size_t d = 1; d <= nd; ++d) s << ",tb_p" << d;
    s << '\n';
    for (std::size_t i = 0; i < n; ++i) {
      s << c.times[i];
      for (double v : c.som[i]) s << ',' << v;
      for (double v : c.tb[i]) s << ',' << v;
      s << '\n';
    }
    res.files["comparison.csv"] = s.str();
    auto series = dot_series(c.times, c.som, "SOM ", false);
    auto tbs = dot_series(c.times, c.tb, "TB ", true);
    // Thin the markers so the lines stay visible.
    for (auto& ser : tbs) {
      PlotSeries thin{ser.label, {}, {}, {}, true};
      const std::size_t every = std::max<std::size_t>(1, ser.x.size() / 60);
      for (std::size_t i = 0; i < ser.x.size(); i += every) {
        thin.x.push_back(ser.x[i]);
        thin.y.push_back(ser.y[i]);
      }
      series.push_back(thin);
    }
    res.files["comparison.svg"] = svg_lines(series, layout("SOM (lines) vs tight binding (circles)", "t [t0]", "P"));
    res.report.details["comparison"] = {{"max_deviation", c.max_deviation}, {"rms_deviation", c.rms_deviation}};
    res.comparison = std::move(c);
  }

  void run_noise() {
    enter("noise");
    StageTimer t(res.report, "noise");
    const NoiseSpec& ns = *cfg.noise;
    const DecoherenceScenario sc{*embedded, barrier_segment(*embedded, res.dots, ns.barrier, "noise.barrier"),
                                 localized->states[cfg.initial_dot - 1], propagator(false), res.dots};
    TelegraphModel model{ns.v_min, ns.v_max, ns.mean_dwell, cfg.seed, ns.start_high};
    res.ensemble = ensemble_run(sc, model, ns.n_runs, ns.threads);
    const EnsembleTrace& e = *res.ensemble;
    std::ostringstream s;
    write_ensemble_csv(s, e);
    res.files["ensemble.csv"] = s.str();
    std::vector<PlotSeries> series;
    const auto means = transpose(e.mean_probs);
    const auto cis = transpose(e.ci_half_width);
    for (std::size_t d = 0; d < means.size(); ++d) {
      series.push_back(PlotSeries{"dot " + std::to_string(d + 1), e.times, means[d], cis[d], false});
    }
    res.files["ensemble.svg"] =
        svg_lines(series, layout("Ensemble mean with 95% Student-t band", "t [t0]", "P"));
    const auto decay = decay_amplitudes(e, cfg.initial_dot - 1);
    res.report.details["decay"] = {{"dot", cfg.initial_dot},
                                   {"first_quarter_lower_amplitude", decay.first_quarter_lower},
                                   {"last_quarter_upper_amplitude", decay.last_quarter_upper},
                                   {"decays", decay.decays()}};
    res.report.details["n_runs"] = e.n_runs;
    set_histogram(e.mean_probs.back());
  }
};

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& cfg, bool write, std::string* stage_out) {
  ScenarioResult res;
  res.report.config = cfg.document;
  res.report.config["seed"] = cfg.seed;
  res.report.details["units"] = {{"x0_m", cfg.units.x0}, {"E0_J", cfg.units.E0}, {"E0_ueV", cfg.units.E0_ueV()},
                                 {"t0_s", cfg.units.t0}};
  std::string stage;
  Pipeline p{cfg, res, stage_out != nullptr ? stage_out : &stage, {}, {}, {}, {}, {}, {}, 0.0};

  p.build_potential();
  const bool som = cfg.solver == SolverKind::som || cfg.solver == SolverKind::both;
  const bool tb = cfg.solver == SolverKind::tb || cfg.solver == SolverKind::both;
  if (p.embedded) {
    p.solve_eigen();
    if (cfg.solver == SolverKind::eigen) p.eigen_outputs();
    if (som || tb) p.localize();
  }
  if (som || tb) p.resolve_pulses();
  if (cfg.noise) {
    p.run_noise();
  } else {
    if (som) p.run_som();
    if (tb) {
      double record_dt = cfg.tb_record_dt.value_or(0.0);
      if (som) {
        record_dt = cfg.dt * static_cast<double>(cfg.record_stride);
        p.horizon = cfg.dt * static_cast<double>(p.propagator(false).n_steps);
      } else if (record_dt <= 0.0) {
        record_dt = p.horizon / 1000.0;
      }
      p.run_tb(record_dt);
    }
    if (som && tb) p.compare();
  }
  if (write) {
    p.enter("output");
    emit_outputs(res, cfg.output);
  }
  return res;
}

Comparison compare_som_tb(const ScenarioConfig& config) {
  ScenarioConfig c = config;
  c.solver = SolverKind::both;
  c.noise.reset();
  for (const PulseSpec& ps : c.pulses) {
    if (!ps.level) throw ValidationError("pulses", "SOM comparison needs a barrier level on every pulse");
  }
  ScenarioResult r = run_scenario(c, false);
  return *r.comparison;
}

void emit_outputs(ScenarioResult& result, const OutputSpec& output) {
  namespace fs = std::filesystem;
  result.report.traces.clear();
  result.report.hashes.clear();
  for (const auto& [name, content] : result.files) {
    const std::string ext = fs::path(name).extension().string();
    if (ext == ".csv" && !output.csv) continue;
    if (ext == ".svg" && !output.svg) continue;
    write_file_atomic(output.dir / name, content);
    result.report.traces.push_back(name);
    if (ext == ".csv") result.report.hashes[name] = sha256_hex(content);
  }
  if (output.json) {
    write_file_atomic(output.dir / "report.json", result.report.to_json().dump(2) + "\n");
    result.report.traces.emplace_back("report.json");
  }
}

}  // namespace qdsim
