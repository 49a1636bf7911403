#include <algorithm>
#include <cstdio>

#include <fmt/format.h>

#include "exitlaw/acceptance.hpp"

int main() {
  const exitlaw::AcceptanceRun run = exitlaw::run_acceptance(42);
  for (const auto& c : run.criteria) fmt::print("{}\n", exitlaw::format_criterion(c));
  for (const auto& r : run.reports)
    for (const auto& w : r.warnings) fmt::print("  [{}] {}\n", r.scenario, w);
  fmt::print("{} / {} criteria passed\n",
             std::count_if(run.criteria.begin(), run.criteria.end(), [](const auto& c) { return c.passed; }),
             run.criteria.size());
  return run.passed() ? 0 : 1;
}
