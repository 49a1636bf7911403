#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "exitlaw/errors.hpp"
#include "exitlaw/process.hpp"
#include "exitlaw/rng.hpp"

namespace exitlaw {

inline constexpr std::uint64_t kDefaultEventCap = 10'000'000;
inline constexpr double kHazardTolerance = 1e-12;

/// Pre-kill location Y_{tau-} and kill time tau of one killed trajectory.
template <class Location>
struct ExitSample {
  Location location{};
  double time = 0.0;
  std::uint64_t n_thinning_rejections = 0;
};

using CtmcExit = ExitSample<std::size_t>;
using RayExit = ExitSample<double>;

/// Exp(1) threshold xi and the hazard accumulated so far. The trajectory is
/// killed as soon as the accumulated hazard reaches the threshold; the
/// survival weight m_t is exp(-accumulated).
class HazardAccumulator {
 public:
  explicit HazardAccumulator(double threshold);
  static HazardAccumulator draw(Rng& rng) { return HazardAccumulator(standard_exponential(rng)); }

  double threshold() const { return threshold_; }
  double accumulated() const { return accumulated_; }
  double remaining() const { return threshold_ - accumulated_; }
  bool fired() const { return accumulated_ >= threshold_; }
  double survival_weight() const;

  void add(double hazard);

 private:
  double threshold_;
  double accumulated_ = 0.0;
};

/// Holding interval of a chain path: `dwell` time units spent in `state`.
struct Dwell {
  std::size_t state;
  double dwell;
};

/// Finite chain with per-state killing, with jump tables prepared for
/// repeated sampling. Immutable after construction.
class KilledChain {
 public:
  KilledChain(GeneratorMatrix q, RateFunction kappa);

  std::size_t size() const { return rows_.size(); }
  const GeneratorMatrix& generator() const { return q_; }
  const RateFunction& kappa() const { return kappa_; }

  /// Runs the killed chain from x0. In state i it holds Exp(q_i + kappa_i),
  /// then is killed with probability kappa_i / (q_i + kappa_i) or otherwise
  /// jumps to j with probability q[i][j] / (q_i + kappa_i). `on_dwell(state,
  /// dwell)` sees every holding interval, including the one ended by the kill.
  template <class OnDwell>
  CtmcExit run(std::size_t x0, Rng& rng, OnDwell&& on_dwell,
               std::uint64_t event_cap = kDefaultEventCap) const;

 private:
  struct Row {
    double kill_rate = 0.0;
    double total_rate = 0.0;
    std::vector<std::size_t> targets;
    std::vector<double> cumulative;  // running sums of jump rates, starting after kill_rate
  };

  std::size_t pick_jump(const Row& row, double u) const;
  [[noreturn]] void fail_absorbing(std::size_t state) const;
  [[noreturn]] void fail_cap(std::size_t x0, std::uint64_t cap) const;

  GeneratorMatrix q_;
  RateFunction kappa_;
  std::vector<Row> rows_;
};

template <class OnDwell>
CtmcExit KilledChain::run(std::size_t x0, Rng& rng, OnDwell&& on_dwell,
                          std::uint64_t event_cap) const {
  if (x0 >= rows_.size()) throw DomainError("start state " + std::to_string(x0) + " out of range");
  std::size_t state = x0;
  double t = 0.0;
  for (std::uint64_t event = 0; event < event_cap; ++event) {
    const Row& row = rows_[state];
    if (row.total_rate <= 0.0) fail_absorbing(state);
    const double dwell = standard_exponential(rng) / row.total_rate;
    on_dwell(state, dwell);
    t += dwell;
    const double u = uniform_open(rng) * row.total_rate;
    if (u < row.kill_rate) return CtmcExit{state, t, 0};
    state = pick_jump(row, u);
  }
  fail_cap(x0, event_cap);
}

CtmcExit sample_exit_ctmc(const KilledChain& chain, std::size_t x0, Rng& rng,
                          std::uint64_t event_cap = kDefaultEventCap);

/// Position x >= x0 where the integrated hazard from x0 first reaches xi.
double invert_ray_hazard(const RateFunction& kappa, double x0, double xi);

/// Deterministic inversion for an injected threshold xi.
RayExit exit_ray_from_threshold(const RateFunction& kappa, double x0, double xi);

RayExit sample_exit_ray_inversion(const RateFunction& kappa, double x0, Rng& rng);

/// First accepted point of a Poisson process thinned window by window: in
/// the window [x0 + k*window, x0 + (k+1)*window) proposals arrive at the
/// window's exact rate bound M and are kept with probability kappa / M.
RayExit sample_exit_ray_thinning(const RateFunction& kappa, double x0, Rng& rng, double window,
                                 std::uint64_t event_cap = kDefaultEventCap);

/// Sum of kappa(state) * dwell over a chain path segment.
double integrated_hazard(const RateFunction& kappa, std::span<const Dwell> path);
/// Integral of kappa over the ray interval [a, b].
double integrated_hazard(const RateFunction& kappa, double a, double b);

}  // namespace exitlaw
