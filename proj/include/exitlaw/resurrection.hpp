#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "exitlaw/killing_clock.hpp"
#include "exitlaw/process.hpp"
#include "exitlaw/rng.hpp"
#include "exitlaw/stats.hpp"

namespace exitlaw {

/// Rebirth law mu: weights over chain states, or a point on the ray.
class RebirthMeasure {
 public:
  static RebirthMeasure discrete(std::vector<double> weights);
  static RebirthMeasure state(std::size_t n_states, std::size_t index);
  static RebirthMeasure from_vector(const Eigen::VectorXd& weights);
  static RebirthMeasure ray_point(double x0);

  bool on_ray() const { return on_ray_; }
  double position() const { return position_; }
  const std::vector<double>& weights() const { return weights_; }
  Eigen::VectorXd as_vector() const;

  std::size_t sample_state(Rng& rng) const;

 private:
  bool on_ray_ = false;
  double position_ = 0.0;
  std::vector<double> weights_;
  std::vector<double> cumulative_;
};

/// Fixed-width bins on [0, x_max) plus a tail bin [x_max, inf).
struct RayBinning {
  double width = 0.05;
  double x_max = 10.0;

  std::size_t regular_bins() const;
  std::vector<double> edges() const;  // last edge is +inf
};

/// Time spent in each state (or ray bin) by the resurrected process, and the
/// lengths of its regeneration cycles. The regeneration times are the
/// running sums of the cycle lengths.
class RegenerationLog {
 public:
  static RegenerationLog for_states(std::vector<long> labels);
  static RegenerationLog for_bins(std::vector<double> edges);

  bool binned() const { return !edges_.empty(); }
  const std::vector<long>& labels() const { return labels_; }
  const std::vector<double>& edges() const { return edges_; }
  const std::vector<double>& occupation() const { return occupation_; }
  const std::vector<double>& cycle_lengths() const { return cycle_lengths_; }
  std::vector<double> regeneration_times() const;
  std::size_t cycles() const { return cycle_lengths_.size(); }
  double total_time() const;

  void add_state_time(std::size_t state, double dt) { occupation_[state] += dt; }
  /// Adds the time a unit-speed path spends in each bin while moving from a to b.
  void add_ray_path(double a, double b);
  void end_cycle(double length) { cycle_lengths_.push_back(length); }

  /// Sums occupation and appends the other log's cycles.
  void merge(const RegenerationLog& other);

  /// Throws DomainError when an invariant is broken.
  void check() const;

 private:
  std::vector<long> labels_;
  std::vector<double> edges_;
  std::vector<double> occupation_;
  std::vector<double> cycle_lengths_;
};

inline constexpr std::size_t kDefaultChunk = 2048;

/// K independent killed excursions, each started from mu and recorded up to
/// its kill; cycle k uses stream (seed, stage, k).
RegenerationLog simulate_resurrected(const KilledChain& chain, const RebirthMeasure& mu,
                                     std::size_t n_cycles, std::uint64_t seed,
                                     std::uint64_t stage = 2);

RegenerationLog simulate_resurrected(const RateFunction& kappa, const RebirthMeasure& mu,
                                     std::size_t n_cycles, const RayBinning& binning,
                                     std::uint64_t seed, std::uint64_t stage = 2);

/// Ratio-of-sums estimate of the invariant law: occupation / total time.
EmpiricalDistribution invariant_estimate(const RegenerationLog& log);

/// kappa(x) Pi(x) / sum_y kappa(y) Pi(y). On bins, kappa is averaged over
/// the bin (exactly, through its antiderivative); the tail bin uses kappa
/// at its left edge.
EmpiricalDistribution kappa_reweight(const EmpiricalDistribution& pi, const RateFunction& kappa);

/// Running-mean monitor for the cycle length. The estimate is flagged as not
/// converged when the relative standard error of the mean cycle length is
/// above `max_relative_error`, or when the mean over the second half of the
/// cycles differs from the first half by more than `max_drift` (relative).
struct IntegrabilityDiagnostic {
  double mean_length = 0.0;
  double relative_std_error = 0.0;
  double half_drift = 0.0;
  double max_cycle_share = 0.0;
  bool converged = true;
  std::string message;
};

IntegrabilityDiagnostic integrability_diagnostic(const RegenerationLog& log,
                                                 double max_relative_error = 0.05,
                                                 double max_drift = 0.25);

double lag1_autocorrelation(const std::vector<double>& x);

}  // namespace exitlaw
