// Command-line front end: runs scenario configurations and writes results.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qdsim/errors.hpp"
#include "qdsim/scenario.hpp"

namespace {

struct Options {
  std::string config;
  std::vector<std::string> sets;
  std::string out_dir;
  std::vector<std::string> formats;
  long long seed = -1;
  bool quiet = false;
};

void add_common(CLI::App* cmd, Options& o, bool config_positional) {
  if (config_positional) {
    cmd->add_option("config", o.config, "Scenario configuration (JSON)")->required()->check(CLI::ExistingFile);
  } else {
    cmd->add_option("--config,-c", o.config, "Scenario configuration (JSON)")->required()->check(CLI::ExistingFile);
  }
  cmd->add_option("--seed", o.seed, "Master seed")->check(CLI::NonNegativeNumber);
  cmd->add_option("--out-dir,-o", o.out_dir, "Output directory");
  cmd->add_option("--format", o.formats, "Output formats")->check(CLI::IsMember({"csv", "svg", "json"}));
  cmd->add_option("--set", o.sets, "Override a config field, e.g. --set eigen.n_basis=200");
  cmd->add_flag("--quiet,-q", o.quiet, "Only print errors");
}

void print_summary(const qdsim::ScenarioResult& r, const qdsim::ScenarioConfig& cfg) {
  std::cout << "scenario: " << cfg.name << "\n";
  if (r.report.n_bound) {
    std::cout << "bound states: " << *r.report.n_bound << "\n";
    std::cout << "lowest energies [E0]:";
    for (double e : r.report.lowest_energies) std::cout << ' ' << e;
    std::cout << "\n";
  }
  if (!r.dots.empty()) std::cout << "dots: " << r.dots.size() << "\n";
  for (const auto& p : r.pulses) {
    std::cout << "pulse barrier " << p.barrier << ": t_high=" << p.t_high << " E0, start=" << p.t_start
              << " t0, width=" << p.width << " t0\n";
  }
  if (!r.report.histogram.empty()) {
    std::cout << "final occupation:";
    for (double p : r.report.histogram) std::cout << ' ' << p;
    std::cout << "  residual: " << r.report.residual << "\n";
  }
  if (r.comparison) {
    std::cout << "SOM vs TB max deviation:";
    for (double d : r.comparison->max_deviation) std::cout << ' ' << d;
    std::cout << "\n";
  }
  if (r.report.details.contains("decay")) std::cout << "decay: " << r.report.details["decay"].dump() << "\n";
  std::cout << "outputs in " << cfg.output.dir.string() << ":";
  for (const auto& t : r.report.traces) std::cout << ' ' << t;
  std::cout << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum-dot charge-qubit simulator"};
  app.require_subcommand(1);
  Options o;

  struct Sub {
    CLI::App* cmd;
    const char* forced_solver;  // nullptr keeps the config's solver
    bool noise;
  };
  std::vector<Sub> subs;
  subs.push_back({app.add_subcommand("run", "Run a scenario as configured"), nullptr, true});
  subs.push_back({app.add_subcommand("eig", "Eigenstates and spectrum"), "eigen", false});
  subs.push_back({app.add_subcommand("evolve", "Split-operator evolution"), "som", false});
  subs.push_back({app.add_subcommand("tb", "Tight-binding evolution"), "tb", false});
  subs.push_back({app.add_subcommand("decohere", "Telegraph-noise ensemble"), "som", true});
  subs.push_back({app.add_subcommand("compare", "Split-operator vs tight-binding"), "both", false});
  for (std::size_t i = 0; i < subs.size(); ++i) add_common(subs[i].cmd, o, i == 0);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  std::string stage = "config";
  try {
    const Sub* active = nullptr;
    for (const Sub& s : subs) {
      if (s.cmd->parsed()) active = &s;
    }
    std::vector<std::string> overrides;
    if (active->forced_solver != nullptr) overrides.push_back(std::string("solver=\"") + active->forced_solver + "\"");
    overrides.insert(overrides.end(), o.sets.begin(), o.sets.end());
    if (o.seed >= 0) overrides.push_back("seed=" + std::to_string(o.seed));
    if (!o.out_dir.empty()) overrides.push_back("output.dir=" + nlohmann::json(o.out_dir).dump());
    if (!o.formats.empty()) overrides.push_back("output.formats=" + nlohmann::json(o.formats).dump());

    auto doc_path = std::filesystem::path(o.config);
    std::ifstream in(doc_path);
    nlohmann::json doc = nlohmann::json::parse(in, nullptr, true, true);
    for (const auto& ov : overrides) qdsim::apply_override(doc, ov);
    if (!active->noise) doc.erase("noise");
    if (std::string(active->cmd->get_name()) == "decohere" && !doc.contains("noise")) {
      throw qdsim::ValidationError("noise", "decohere needs a noise block");
    }
    const qdsim::ScenarioConfig cfg =
        qdsim::parse_config(doc, doc_path.has_parent_path() ? doc_path.parent_path() : std::filesystem::path("."));
    const qdsim::ScenarioResult result = qdsim::run_scenario(cfg, true, &stage);
    if (!o.quiet) print_summary(result, cfg);
    return 0;
  } catch (const nlohmann::json::parse_error& e) {
    std::cerr << "error: invalid JSON in " << o.config << ": " << e.what() << "\n";
    return 2;
  } catch (const qdsim::InvalidArgument& e) {
    std::cerr << "error (" << stage << "): " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error (" << stage << "): " << e.what() << "\n";
    return 1;
  }
}
