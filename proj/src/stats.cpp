#include "exitlaw/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

#include "exitlaw/errors.hpp"

namespace exitlaw {

void EmpiricalDistribution::check() const {
  if (mass_.empty()) throw StatsError("distribution has empty support");
  if (binned()) {
    if (edges_.size() != mass_.size() + 1) throw StatsError("bin edge count must be mass count + 1");
    for (std::size_t i = 0; i + 1 < edges_.size(); ++i)
      if (!(edges_[i + 1] > edges_[i])) throw StatsError("bin edges must be strictly increasing");
  } else if (labels_.size() != mass_.size()) {
    throw StatsError("label count must equal mass count");
  }
  double s = 0.0;
  for (double m : mass_) {
    if (!(m >= 0.0) || !std::isfinite(m)) throw StatsError("masses must be finite and nonnegative");
    s += m;
  }
  if (std::abs(s - 1.0) > kMassTolerance)
    throw StatsError("masses sum to " + std::to_string(s) + ", not 1");
}

EmpiricalDistribution EmpiricalDistribution::over_labels(std::vector<long> labels, std::vector<double> mass,
                                                         std::uint64_t n_samples) {
  EmpiricalDistribution d;
  d.labels_ = std::move(labels);
  d.mass_ = std::move(mass);
  d.n_samples_ = n_samples;
  d.check();
  return d;
}

EmpiricalDistribution EmpiricalDistribution::over_bins(std::vector<double> edges, std::vector<double> mass,
                                                       std::uint64_t n_samples) {
  EmpiricalDistribution d;
  d.edges_ = std::move(edges);
  d.mass_ = std::move(mass);
  d.n_samples_ = n_samples;
  d.check();
  return d;
}

namespace {

std::vector<double> normalize(std::vector<double> w) {
  const double s = std::accumulate(w.begin(), w.end(), 0.0);
  if (!(s > 0.0) || !std::isfinite(s)) throw StatsError("weights must have a positive finite sum");
  for (double& x : w) x /= s;
  return w;
}

}  // namespace

EmpiricalDistribution EmpiricalDistribution::normalized_labels(std::vector<long> labels,
                                                               std::vector<double> weights,
                                                               std::uint64_t n_samples) {
  return over_labels(std::move(labels), normalize(std::move(weights)), n_samples);
}

EmpiricalDistribution EmpiricalDistribution::normalized_bins(std::vector<double> edges,
                                                             std::vector<double> weights,
                                                             std::uint64_t n_samples) {
  return over_bins(std::move(edges), normalize(std::move(weights)), n_samples);
}

bool EmpiricalDistribution::same_support(const EmpiricalDistribution& other) const {
  return binned() == other.binned() && labels_ == other.labels_ && edges_ == other.edges_;
}

std::vector<double> histogram(std::span<const double> samples, std::span<const double> edges) {
  if (edges.size() < 2) throw StatsError("histogram needs at least one bin");
  std::vector<double> counts(edges.size() - 1, 0.0);
  for (double x : samples) {
    if (!(x >= edges.front()) || !(x < edges.back())) continue;
    const auto it = std::upper_bound(edges.begin(), edges.end(), x);
    counts[static_cast<std::size_t>(it - edges.begin()) - 1] += 1.0;
  }
  return counts;
}

double tv_distance(const EmpiricalDistribution& p, const EmpiricalDistribution& q) {
  if (!p.same_support(q)) throw StatsError("tv_distance: mismatched support");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return std::clamp(0.5 * s, 0.0, 1.0);
}

double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    // Jacobi-theta form of the cdf converges fast for small lambda.
    const double c = std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
    double s = 0.0;
    for (int k = 1; k <= 20; ++k) {
      const double m = 2.0 * k - 1.0;
      s += std::exp(-m * m * c);
    }
    return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * s, 0.0, 1.0);
  }
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    s += (k % 2 == 1 ? term : -term);
    if (term < 1e-300) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

KsResult ks_test(std::span<const double> samples, const std::function<double(double)>& cdf) {
  if (samples.size() < 10) throw StatsError("ks_test needs at least 10 samples");
  std::vector<double> x(samples.begin(), samples.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return KsResult{d, kolmogorov_survival(std::sqrt(n) * d)};
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 10 || b.size() < 10) throw StatsError("ks_two_sample needs at least 10 samples per side");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double n = static_cast<double>(x.size()), m = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  return KsResult{d, kolmogorov_survival(std::sqrt(n * m / (n + m)) * d)};
}

double chi_square_survival(double statistic, double df) {
  if (!(df > 0.0)) throw StatsError("chi-square needs positive degrees of freedom");
  if (statistic <= 0.0) return 1.0;
  if (!std::isfinite(statistic)) return 0.0;
  return boost::math::gamma_q(0.5 * df, 0.5 * statistic);
}

ChiSquareResult chi_square_test(std::span<const double> observed, std::span<const double> expected) {
  if (observed.size() != expected.size()) throw StatsError("chi_square_test: size mismatch");
  if (observed.size() < 2) throw StatsError("chi_square_test: need at least 2 cells");
  const double n = std::accumulate(observed.begin(), observed.end(), 0.0);
  const double psum = std::accumulate(expected.begin(), expected.end(), 0.0);
  if (!(n > 0.0) || !(psum > 0.0)) throw StatsError("chi_square_test: empty counts or probabilities");

  std::vector<double> obs, exp;
  double o = 0.0, e = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    o += observed[i];
    e += n * expected[i] / psum;
    if (e >= 5.0) {
      obs.push_back(o);
      exp.push_back(e);
      o = e = 0.0;
    }
  }
  if (e > 0.0 || o > 0.0) {
    if (exp.empty()) {
      obs.push_back(o);
      exp.push_back(e);
    } else {
      obs.back() += o;
      exp.back() += e;
    }
  }
  if (exp.size() < 2) throw StatsError("chi_square_test: fewer than 2 cells after pooling");
  for (double x : exp)
    if (x < 5.0) throw StatsError("chi_square_test: a cell expects fewer than 5 counts after pooling");

  double stat = 0.0;
  for (std::size_t i = 0; i < exp.size(); ++i) stat += (obs[i] - exp[i]) * (obs[i] - exp[i]) / exp[i];
  const auto df = exp.size() - 1;
  return ChiSquareResult{stat, chi_square_survival(stat, static_cast<double>(df)), df, exp.size()};
}

namespace {

// Equal-count bin index of every value; tied values share a bin.
std::vector<std::size_t> quantile_bins(const std::vector<double>& values, std::size_t bins) {
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> distinct = sorted;
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  std::vector<double> cuts;  // value v goes to bin #(cuts <= v)
  if (distinct.size() <= bins) {
    cuts.assign(distinct.begin() + 1, distinct.end());
  } else {
    for (std::size_t b = 1; b < bins; ++b) {
      const double c = sorted[b * sorted.size() / bins];
      if (cuts.empty() || c > cuts.back()) cuts.push_back(c);
    }
  }
  std::vector<std::size_t> idx(values.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    idx[i] = static_cast<std::size_t>(std::upper_bound(cuts.begin(), cuts.end(), values[i]) - cuts.begin());
  return idx;
}

}  // namespace

ChiSquareResult independence_test(std::span<const std::pair<double, double>> time_location,
                                  std::size_t time_bins, std::size_t location_bins) {
  if (time_bins < 2 || location_bins < 2) throw StatsError("independence_test: need at least 2 bins per axis");
  if (time_location.size() < 50 * time_bins * location_bins)
    throw StatsError("independence_test: need n >= 50 * time_bins * location_bins");
  std::vector<double> times, locs;
  times.reserve(time_location.size());
  locs.reserve(time_location.size());
  for (const auto& [t, x] : time_location) {
    times.push_back(t);
    locs.push_back(x);
  }
  const auto ti = quantile_bins(times, time_bins);
  const auto li = quantile_bins(locs, location_bins);
  const std::size_t rows = *std::max_element(ti.begin(), ti.end()) + 1;
  const std::size_t cols = *std::max_element(li.begin(), li.end()) + 1;
  std::vector<double> table(rows * cols, 0.0), row_sum(rows, 0.0), col_sum(cols, 0.0);
  for (std::size_t k = 0; k < ti.size(); ++k) {
    table[ti[k] * cols + li[k]] += 1.0;
    row_sum[ti[k]] += 1.0;
    col_sum[li[k]] += 1.0;
  }
  const auto occupied = [](const std::vector<double>& v) {
    return static_cast<std::size_t>(std::count_if(v.begin(), v.end(), [](double x) { return x > 0.0; }));
  };
  const std::size_t live_rows = occupied(row_sum), live_cols = occupied(col_sum);
  if (live_rows < 2) throw StatsError("independence_test: degenerate time marginal");
  if (live_cols < 2) throw StatsError("independence_test: degenerate location marginal (one occupied bin)");

  const double n = static_cast<double>(ti.size());
  double stat = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (row_sum[r] == 0.0 || col_sum[c] == 0.0) continue;
      const double e = row_sum[r] * col_sum[c] / n;
      const double d = table[r * cols + c] - e;
      stat += d * d / e;
    }
  }
  const auto df = (live_rows - 1) * (live_cols - 1);
  return ChiSquareResult{stat, chi_square_survival(stat, static_cast<double>(df)), df, live_rows * live_cols};
}

}  // namespace exitlaw
