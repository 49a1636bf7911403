#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "exitlaw/process.hpp"
#include "exitlaw/stats.hpp"

namespace exitlaw {

enum class ModelKind { kCtmc, kRay };

/// Where killed trajectories start and where the resurrected process is reborn.
struct StartLaw {
  enum class Kind { kState, kWeights, kQsd, kPosition };
  Kind kind = Kind::kState;
  long label = 0;
  std::vector<double> weights;
  double position = 0.0;
};

struct ScenarioConfig {
  std::string name = "scenario";
  ModelKind model = ModelKind::kCtmc;
  GeneratorMatrix q;  // chain models only
  RateFunction kappa;
  StartLaw mu;
  long truncation = 0;  // N for walks truncated to {-N..N}; 0 when not a truncation

  std::size_t n_kills = 100'000;
  std::size_t n_regen_cycles = 10'000;
  std::uint64_t seed = 42;

  double bin_width = 0.05;
  std::optional<double> x_max;  // ray: chosen from the analytic tail when absent
  double thinning_window = 1.0;

  double tv_exit_threshold = 0.01;
  double tv_resurrected_threshold = 0.02;
  double alpha = 0.001;
  std::optional<double> mixture_eps;  // qsd: defaults to min kappa when positive
  std::size_t time_bins = 4;
  std::size_t location_bins = 5;

  std::filesystem::path output_dir = "exitlaw_out";
};

/// Parses the JSON scenario format; throws ConfigError naming the bad key.
ScenarioConfig parse_config(const nlohmann::json& j);
ScenarioConfig load_config(const std::filesystem::path& path);

std::vector<std::string> preset_names();
/// Embedded scenario definitions, in the same JSON format as config files.
const nlohmann::json& preset_json(std::string_view name);
ScenarioConfig preset(std::string_view name);

struct CheckResult {
  std::string name;
  bool passed = true;
  std::string detail;
};

struct Report {
  std::string scenario;
  std::uint64_t seed = 0;

  std::optional<EmpiricalDistribution> exact_exit;
  std::optional<EmpiricalDistribution> empirical_exit;
  std::optional<EmpiricalDistribution> resurrected_invariant;
  std::optional<EmpiricalDistribution> reweighted_prediction;
  // Secondary laws shown in the summary only.
  std::optional<EmpiricalDistribution> exact_invariant;
  std::optional<EmpiricalDistribution> thinning_exit;

  std::vector<std::pair<std::string, double>> values;
  std::vector<CheckResult> checks;
  std::vector<std::string> warnings;
  std::vector<std::pair<std::string, double>> timings;

  bool passed() const;
  const CheckResult* check(std::string_view name) const;
  std::optional<double> value(std::string_view name) const;
  void add_check(std::string name, bool passed, std::string detail);
};

/// Exact solve, killed-trajectory sampling and resurrected-process
/// estimation for a chain scenario, with all pairwise comparisons.
Report run_scenario(const ScenarioConfig& config);

/// Quasi-stationary checks for a chain scenario: eigenpair, exponential
/// lifetime, independence of kill time and place, exit law proportional to
/// kappa * pi, the fixed point Pi(pi) = pi and the two-clock mixture.
Report run_qsd_scenario(const ScenarioConfig& config);

/// Ray scenario: inversion and thinning samplers against the closed-form exit
/// law, and binned resurrected occupation against exp(-int kappa).
Report run_ray_scenario(const ScenarioConfig& config);

/// Dispatches on the model kind (qsd start runs the quasi-stationary pipeline).
Report run_any(const ScenarioConfig& config);

/// Writes <scenario>_table.csv, <scenario>_summary.txt and <scenario>_exit.svg.
/// Every distribution is validated before anything is written.
std::vector<std::filesystem::path> emit_outputs(const Report& report, const std::filesystem::path& dir);

std::string format_table(const Report& report);
std::string format_summary(const Report& report);
std::string format_figure(const Report& report);

}  // namespace exitlaw
