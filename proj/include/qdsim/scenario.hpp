#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qdsim/eigensolver.hpp"
#include "qdsim/noise.hpp"
#include "qdsim/potential.hpp"
#include "qdsim/splitop.hpp"
#include "qdsim/tightbinding.hpp"
#include "qdsim/units.hpp"

namespace qdsim {

enum class SolverKind { eigen, som, tb, both };

enum class PotentialSource { none, table, piecewise };

struct PulseSpec {
  std::size_t barrier = 1;         // 1-based; barrier j separates dots j and j+1
  std::optional<double> level;     // barrier height during the pulse, E0
  std::optional<double> t_high;    // hopping during the pulse, E0 (else calibrated)
  std::optional<double> t_start;   // absolute start, t0
  double gap = 0.0;                // start after the previous pulse ends (when t_start is unset)
  std::optional<GateKind> gate;    // width from the Rabi period of this pulse
  int repeats = 0;                 // k in T0/2 + k T0
  double width = 0.0;              // explicit width, t0
};

struct NoiseSpec {
  std::size_t barrier = 1;
  double v_min = 4.0;
  double v_max = 5.0;
  double mean_dwell = 1.0;  // t0
  std::size_t n_runs = 100;
  bool start_high = false;
  std::size_t threads = 0;
};

struct OutputSpec {
  std::filesystem::path dir = "out";
  bool csv = true;
  bool svg = true;
  bool json = true;
  int svg_width = 800;
  int svg_height = 500;
};

struct ScenarioConfig {
  nlohmann::json document;  // after overrides
  std::filesystem::path base_dir;
  std::string name = "scenario";
  UnitSystem units = UnitSystem::standard();

  PotentialSource source = PotentialSource::none;
  std::filesystem::path table_path;
  std::optional<ApproximationOptions> approximation;
  std::optional<PiecewisePotential> piecewise;
  std::optional<double> L;
  double margin_h = 0.0;
  double wall_height = 200.0;

  SolverKind solver = SolverKind::eigen;
  std::size_t n_points = 512;
  std::size_t n_basis = 320;
  std::optional<double> bound_threshold;
  std::size_t export_states = 6;
  bool compare_approximations = false;
  ApproximationOptions fine_options{ApproximationMode::fine, 0, 0.1, 0.5, SegmentShape::constant};

  std::size_t initial_dot = 1;
  std::vector<std::size_t> target_dots;  // 1-based; residual is what they miss
  std::vector<PulseSpec> pulses;
  std::optional<double> horizon;
  double horizon_after_pulses = 0.0;
  double dt = 1e-4;
  std::size_t record_stride = 100;
  bool heatmap = true;

  std::optional<std::size_t> tb_sites;
  std::optional<std::vector<double>> tb_t_low;
  std::optional<double> tb_record_dt;

  std::optional<NoiseSpec> noise;
  OutputSpec output;
  std::uint64_t seed = 0;
};

/// Applies "a.b.c=value"; the value is parsed as JSON when possible, else taken as a string.
void apply_override(nlohmann::json& document, const std::string& assignment);

/// Validates and resolves a configuration document. Missing or malformed
/// fields raise ValidationError naming the dotted path.
ScenarioConfig parse_config(const nlohmann::json& document, const std::filesystem::path& base_dir = ".");
ScenarioConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

/// Dotted paths that the configuration requires for its solver selection.
std::vector<std::string> required_fields(const nlohmann::json& document);

struct ResolvedPulse {
  std::size_t barrier = 1;
  double level = 0.0;
  double t_low = 0.0;
  double t_high = 0.0;
  double t_start = 0.0;
  double width = 0.0;
};

struct Comparison {
  std::vector<double> times;
  std::vector<std::vector<double>> som;
  std::vector<std::vector<double>> tb;
  std::vector<double> max_deviation;  // per dot
  std::vector<double> rms_deviation;  // per dot
};

struct RunReport {
  nlohmann::json config;
  std::optional<std::size_t> n_bound;
  std::vector<double> lowest_energies;
  std::vector<std::string> traces;
  std::vector<double> histogram;
  double residual = 0.0;  // 1 minus the target dots' share (all dots without targets)
  std::map<std::string, double> timings_ms;
  std::map<std::string, std::string> hashes;
  nlohmann::json details = nlohmann::json::object();

  nlohmann::json to_json() const;
};

struct ScenarioResult {
  RunReport report;
  std::optional<EigenSolution> eigen;
  std::vector<Interval> dots;
  std::vector<ResolvedPulse> pulses;
  std::optional<EvolutionTrace> som;
  std::optional<AmplitudeTrace> tb;
  std::optional<EnsembleTrace> ensemble;
  std::optional<Comparison> comparison;
  std::map<std::string, std::string> files;  // name -> content
};

/// Executes the configured pipeline. Files are written only when `write` is set.
/// `stage` (optional) holds the name of the last stage entered, for error context.
ScenarioResult run_scenario(const ScenarioConfig& config, bool write = true, std::string* stage = nullptr);

/// Runs the configuration with both solvers and returns the aligned comparison.
Comparison compare_som_tb(const ScenarioConfig& config);

/// Writes every emitted file below config.output.dir, honouring the formats.
void emit_outputs(ScenarioResult& result, const OutputSpec& output);

}  // namespace qdsim
