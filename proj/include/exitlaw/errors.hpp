#pragma once

#include <stdexcept>
#include <string>

namespace exitlaw {

// Argument outside the domain of a rate function or model (unknown state,
// negative ray position, malformed interval).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The killed process does not reach the cemetery almost surely from the
// requested start: no reachable killing, finite total hazard, or the
// per-trajectory event cap was exhausted.
class KillingNotAlmostSure : public std::runtime_error {
 public:
  explicit KillingNotAlmostSure(const std::string& what)
      : std::runtime_error("killing not almost sure: " + what) {}
};

// Linear algebra failures: singular systems, reducible generators,
// eigen-iterations that do not converge.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Statistical test preconditions (too few samples, degenerate marginals).
class StatsError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace exitlaw
