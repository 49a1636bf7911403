#include "exitlaw/resurrection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "exitlaw/errors.hpp"
#include "exitlaw/parallel.hpp"

namespace exitlaw {

RebirthMeasure RebirthMeasure::discrete(std::vector<double> weights) {
  if (weights.empty()) throw DomainError("rebirth measure has no support");
  double s = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("rebirth weights must be nonnegative");
    s += w;
  }
  if (std::abs(s - 1.0) > 1e-12) throw DomainError("rebirth weights must sum to 1");
  RebirthMeasure mu;
  mu.weights_ = std::move(weights);
  mu.cumulative_.resize(mu.weights_.size());
  std::partial_sum(mu.weights_.begin(), mu.weights_.end(), mu.cumulative_.begin());
  return mu;
}

RebirthMeasure RebirthMeasure::state(std::size_t n_states, std::size_t index) {
  if (index >= n_states) throw DomainError("rebirth state out of range");
  std::vector<double> w(n_states, 0.0);
  w[index] = 1.0;
  return discrete(std::move(w));
}

RebirthMeasure RebirthMeasure::from_vector(const Eigen::VectorXd& weights) {
  std::vector<double> w(weights.data(), weights.data() + weights.size());
  for (double& x : w)
    if (x < 0.0 && x > -1e-14) x = 0.0;
  const double s = std::accumulate(w.begin(), w.end(), 0.0);
  if (std::abs(s - 1.0) <= 1e-10)
    for (double& x : w) x /= s;
  return discrete(std::move(w));
}

RebirthMeasure RebirthMeasure::ray_point(double x0) {
  RayModel model(x0);  // validates the position
  RebirthMeasure mu;
  mu.on_ray_ = true;
  mu.position_ = model.start;
  return mu;
}

Eigen::VectorXd RebirthMeasure::as_vector() const {
  if (on_ray_) throw DomainError("ray rebirth measure has no state vector");
  return Eigen::Map<const Eigen::VectorXd>(weights_.data(), static_cast<Eigen::Index>(weights_.size()));
}

std::size_t RebirthMeasure::sample_state(Rng& rng) const {
  if (on_ray_) throw DomainError("ray rebirth measure has no states");
  const double u = uniform_open(rng) * cumulative_.back();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  auto k = static_cast<std::size_t>(it - cumulative_.begin());
  if (k >= weights_.size()) k = weights_.size() - 1;
  while (weights_[k] == 0.0 && k > 0) --k;  // never land on a zero-weight state at a rounding edge
  return k;
}

std::size_t RayBinning::regular_bins() const {
  if (!(width > 0.0) || !(x_max > 0.0)) throw DomainError("ray binning needs positive width and x_max");
  return static_cast<std::size_t>(std::ceil(x_max / width - 1e-9));
}

std::vector<double> RayBinning::edges() const {
  const std::size_t nb = regular_bins();
  std::vector<double> e(nb + 2);
  for (std::size_t k = 0; k <= nb; ++k) e[k] = static_cast<double>(k) * width;
  e[nb + 1] = std::numeric_limits<double>::infinity();
  return e;
}

RegenerationLog RegenerationLog::for_states(std::vector<long> labels) {
  RegenerationLog log;
  log.occupation_.assign(labels.size(), 0.0);
  log.labels_ = std::move(labels);
  return log;
}

RegenerationLog RegenerationLog::for_bins(std::vector<double> edges) {
  if (edges.size() < 2) throw DomainError("regeneration log needs at least one bin");
  RegenerationLog log;
  log.occupation_.assign(edges.size() - 1, 0.0);
  log.edges_ = std::move(edges);
  return log;
}

std::vector<double> RegenerationLog::regeneration_times() const {
  std::vector<double> t(cycle_lengths_.size());
  std::partial_sum(cycle_lengths_.begin(), cycle_lengths_.end(), t.begin());
  return t;
}

double RegenerationLog::total_time() const {
  return std::accumulate(cycle_lengths_.begin(), cycle_lengths_.end(), 0.0);
}

void RegenerationLog::add_ray_path(double a, double b) {
  if (!(b >= a) || !(a >= 0.0)) throw DomainError("ray path must satisfy 0 <= a <= b");
  const std::size_t n = occupation_.size();
  std::size_t k = static_cast<std::size_t>(std::upper_bound(edges_.begin(), edges_.end(), a) - edges_.begin()) - 1;
  for (; k < n && edges_[k] < b; ++k) {
    const double overlap = std::min(b, edges_[k + 1]) - std::max(a, edges_[k]);
    if (overlap > 0.0) occupation_[k] += overlap;
  }
}

void RegenerationLog::merge(const RegenerationLog& other) {
  if (labels_ != other.labels_ || edges_ != other.edges_)
    throw DomainError("cannot merge regeneration logs with different supports");
  for (std::size_t i = 0; i < occupation_.size(); ++i) occupation_[i] += other.occupation_[i];
  cycle_lengths_.insert(cycle_lengths_.end(), other.cycle_lengths_.begin(), other.cycle_lengths_.end());
}

void RegenerationLog::check() const {
  for (double o : occupation_)
    if (!(o >= 0.0)) throw DomainError("negative occupation");
  for (double c : cycle_lengths_)
    if (!(c > 0.0)) throw DomainError("regeneration times must be strictly increasing");
  const double total = total_time();
  const double occ = std::accumulate(occupation_.begin(), occupation_.end(), 0.0);
  if (std::abs(occ - total) > 1e-9 * total) {
    std::ostringstream os;
    os << "occupation " << occ << " does not match total time " << total;
    throw DomainError(os.str());
  }
}

namespace {

template <class CycleFn>
RegenerationLog run_cycles(const RegenerationLog& empty, std::size_t n_cycles, CycleFn&& cycle) {
  if (n_cycles == 0) throw DomainError("need at least one regeneration cycle");
  const std::size_t n_chunks = (n_cycles + kDefaultChunk - 1) / kDefaultChunk;
  std::vector<RegenerationLog> parts(n_chunks, empty);
  for_each_chunk(n_cycles, kDefaultChunk, [&](std::size_t c, std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) cycle(parts[c], k);
  });
  RegenerationLog log = empty;
  for (const auto& p : parts) log.merge(p);
  return log;
}

}  // namespace

RegenerationLog simulate_resurrected(const KilledChain& chain, const RebirthMeasure& mu,
                                     std::size_t n_cycles, std::uint64_t seed, std::uint64_t stage) {
  if (mu.on_ray() || mu.weights().size() != chain.size())
    throw DomainError("rebirth measure does not match the chain");
  const auto empty = RegenerationLog::for_states(chain.generator().labels());
  return run_cycles(empty, n_cycles, [&](RegenerationLog& log, std::size_t k) {
    Rng rng = trajectory_stream(seed, stage, k);
    const std::size_t x0 = mu.sample_state(rng);
    const CtmcExit exit = chain.run(x0, rng, [&](std::size_t s, double dt) { log.add_state_time(s, dt); });
    log.end_cycle(exit.time);
  });
}

RegenerationLog simulate_resurrected(const RateFunction& kappa, const RebirthMeasure& mu,
                                     std::size_t n_cycles, const RayBinning& binning,
                                     std::uint64_t seed, std::uint64_t stage) {
  if (!mu.on_ray()) throw DomainError("ray resurrection needs a ray rebirth point");
  const auto empty = RegenerationLog::for_bins(binning.edges());
  return run_cycles(empty, n_cycles, [&](RegenerationLog& log, std::size_t k) {
    Rng rng = trajectory_stream(seed, stage, k);
    const RayExit exit = sample_exit_ray_inversion(kappa, mu.position(), rng);
    log.add_ray_path(mu.position(), exit.location);
    log.end_cycle(exit.time);
  });
}

EmpiricalDistribution invariant_estimate(const RegenerationLog& log) {
  if (log.cycles() == 0 || !(log.total_time() > 0.0)) throw DomainError("empty regeneration log");
  const auto n = static_cast<std::uint64_t>(log.cycles());
  if (log.binned()) return EmpiricalDistribution::normalized_bins(log.edges(), log.occupation(), n);
  return EmpiricalDistribution::normalized_labels(log.labels(), log.occupation(), n);
}

EmpiricalDistribution kappa_reweight(const EmpiricalDistribution& pi, const RateFunction& kappa) {
  std::vector<double> w(pi.size());
  if (pi.binned()) {
    if (kappa.is_table()) throw DomainError("kappa_reweight: binned law needs a ray kappa");
    const auto& e = pi.edges();
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double k = std::isfinite(e[i + 1]) ? ray_hazard(kappa, e[i], e[i + 1]) / (e[i + 1] - e[i])
                                               : eval_rate(kappa, e[i]);
      w[i] = k * pi[i];
    }
  } else {
    if (!kappa.is_table() || kappa.values().size() != pi.size())
      throw DomainError("kappa_reweight: kappa table does not match the support");
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = kappa.values()[i] * pi[i];
  }
  if (!(std::accumulate(w.begin(), w.end(), 0.0) > 0.0))
    throw DomainError("kappa_reweight: kappa vanishes on the support");
  if (pi.binned()) return EmpiricalDistribution::normalized_bins(pi.edges(), std::move(w), pi.n_samples());
  return EmpiricalDistribution::normalized_labels(pi.labels(), std::move(w), pi.n_samples());
}

IntegrabilityDiagnostic integrability_diagnostic(const RegenerationLog& log, double max_relative_error,
                                                 double max_drift) {
  IntegrabilityDiagnostic d;
  const auto& c = log.cycle_lengths();
  const std::size_t k = c.size();
  if (k < 4) {
    d.converged = false;
    d.message = "too few regeneration cycles to judge the mean cycle length";
    return d;
  }
  const double total = log.total_time();
  d.mean_length = total / static_cast<double>(k);
  double ss = 0.0;
  for (double x : c) ss += (x - d.mean_length) * (x - d.mean_length);
  const double sd = std::sqrt(ss / static_cast<double>(k - 1));
  d.relative_std_error = sd / (d.mean_length * std::sqrt(static_cast<double>(k)));
  const std::size_t half = k / 2;
  const double first = std::accumulate(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(half), 0.0) /
                       static_cast<double>(half);
  const double second = std::accumulate(c.begin() + static_cast<std::ptrdiff_t>(half), c.end(), 0.0) /
                        static_cast<double>(k - half);
  d.half_drift = std::abs(second - first) / std::min(first, second);
  d.max_cycle_share = *std::max_element(c.begin(), c.end()) / total;
  d.converged = d.relative_std_error <= max_relative_error && d.half_drift <= max_drift;
  if (!d.converged) {
    std::ostringstream os;
    os << "WARNING: mean cycle length has not converged (relative standard error "
       << d.relative_std_error << ", half-sample drift " << d.half_drift << ", largest cycle holds "
       << d.max_cycle_share << " of total time); E_mu[tau] may be infinite and the resurrected "
       << "invariant estimate is not meaningful";
    d.message = os.str();
  }
  return d;
}

double lag1_autocorrelation(const std::vector<double>& x) {
  if (x.size() < 3) throw DomainError("lag-1 autocorrelation needs at least 3 values");
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    den += (x[i] - mean) * (x[i] - mean);
    if (i + 1 < x.size()) num += (x[i] - mean) * (x[i + 1] - mean);
  }
  return den > 0.0 ? num / den : 0.0;
}

}  // namespace exitlaw
