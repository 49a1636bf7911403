#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "exitlaw/process.hpp"
#include "exitlaw/rng.hpp"
#include "exitlaw/scenario.hpp"

namespace exitlaw {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  double budget = 0.0;  // seconds

  bool within_budget() const { return seconds < budget; }
};

struct AcceptanceRun {
  std::vector<CriterionResult> criteria;
  std::deque<Report> reports;  // one per preset scenario, in run order
  bool passed() const;
};

/// Random conservative generator on n states: a ring with rates in
/// [0.5, 2] plus sparse extra edges, and a killing table with some zeros.
struct RandomInstance {
  GeneratorMatrix q;
  RateFunction kappa;
  std::vector<double> mu;
};

RandomInstance random_instance(Rng& rng, std::size_t max_states = 50);

/// Runs every acceptance criterion. When out_dir is given, each preset
/// report is written there with emit_outputs.
AcceptanceRun run_acceptance(std::uint64_t seed = 42,
                             const std::optional<std::filesystem::path>& out_dir = std::nullopt);

std::string format_criterion(const CriterionResult& c);

}  // namespace exitlaw
