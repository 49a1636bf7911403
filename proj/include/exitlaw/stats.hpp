#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace exitlaw {

inline constexpr double kMassTolerance = 1e-12;

/// Probability masses over either integer state labels or half-open bins
/// [edges[i], edges[i+1]). The last bin edge may be +inf (tail bin).
class EmpiricalDistribution {
 public:
  EmpiricalDistribution() = default;

  static EmpiricalDistribution over_labels(std::vector<long> labels, std::vector<double> mass,
                                           std::uint64_t n_samples);
  static EmpiricalDistribution over_bins(std::vector<double> edges, std::vector<double> mass,
                                         std::uint64_t n_samples);
  // Same, after dividing nonnegative weights by their sum.
  static EmpiricalDistribution normalized_labels(std::vector<long> labels, std::vector<double> weights,
                                                 std::uint64_t n_samples);
  static EmpiricalDistribution normalized_bins(std::vector<double> edges, std::vector<double> weights,
                                               std::uint64_t n_samples);

  bool binned() const { return !edges_.empty(); }
  std::size_t size() const { return mass_.size(); }
  bool empty() const { return mass_.empty(); }
  const std::vector<long>& labels() const { return labels_; }
  const std::vector<double>& edges() const { return edges_; }
  const std::vector<double>& mass() const { return mass_; }
  double operator[](std::size_t i) const { return mass_[i]; }
  std::uint64_t n_samples() const { return n_samples_; }

  bool same_support(const EmpiricalDistribution& other) const;

 private:
  void check() const;

  std::vector<long> labels_;
  std::vector<double> edges_;
  std::vector<double> mass_;
  std::uint64_t n_samples_ = 0;
};

/// Counts of samples per bin; samples outside [edges.front(), edges.back())
/// are dropped.
std::vector<double> histogram(std::span<const double> samples, std::span<const double> edges);

double tv_distance(const EmpiricalDistribution& p, const EmpiricalDistribution& q);

struct KsResult {
  double statistic = 0.0;  // sup |F_n - F|
  double p_value = 1.0;
};

/// Survival function of the Kolmogorov distribution, P(K > lambda).
double kolmogorov_survival(double lambda);

/// One-sample test against a continuous cdf; asymptotic p-value K(sqrt(n) D).
KsResult ks_test(std::span<const double> samples, const std::function<double(double)>& cdf);
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

struct ChiSquareResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t df = 0;
  std::size_t cells = 0;  // after pooling
};

double chi_square_survival(double statistic, double df);

/// Goodness of fit of observed counts to cell probabilities. Adjacent cells
/// are pooled in order until each pooled cell expects at least 5 counts.
ChiSquareResult chi_square_test(std::span<const double> observed, std::span<const double> expected);

/// Chi-square test of independence between kill time and kill location on a
/// time_bins x location_bins contingency table. Time bins hold equal counts;
/// location bins are the distinct values when there are at most
/// location_bins of them, equal-count quantile bins otherwise.
ChiSquareResult independence_test(std::span<const std::pair<double, double>> time_location,
                                  std::size_t time_bins, std::size_t location_bins);

}  // namespace exitlaw
