#include "exitlaw/killing_clock.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace exitlaw {

HazardAccumulator::HazardAccumulator(double threshold) : threshold_(threshold) {
  if (!(threshold > 0.0) || !std::isfinite(threshold))
    throw DomainError("hazard threshold must be finite and positive");
}

double HazardAccumulator::survival_weight() const { return std::exp(-accumulated_); }

void HazardAccumulator::add(double hazard) {
  if (!(hazard >= 0.0)) throw DomainError("hazard increments must be nonnegative");
  accumulated_ += hazard;
}

KilledChain::KilledChain(GeneratorMatrix q, RateFunction kappa)
    : q_(std::move(q)), kappa_(std::move(kappa)) {
  require_valid(q_);
  if (!kappa_.is_table() || kappa_.values().size() != q_.size())
    throw DomainError("killed chain: kappa must be a table with one rate per state");
  rows_.resize(q_.size());
  for (std::size_t i = 0; i < q_.size(); ++i) {
    Row& row = rows_[i];
    row.kill_rate = kappa_.values()[i];
    double acc = row.kill_rate;
    for (std::size_t j = 0; j < q_.size(); ++j) {
      if (j == i || q_(i, j) <= 0.0) continue;
      acc += q_(i, j);
      row.targets.push_back(j);
      row.cumulative.push_back(acc);
    }
    row.total_rate = acc;
  }
}

std::size_t KilledChain::pick_jump(const Row& row, double u) const {
  const auto it = std::upper_bound(row.cumulative.begin(), row.cumulative.end(), u);
  const auto k = std::min<std::size_t>(static_cast<std::size_t>(it - row.cumulative.begin()),
                                       row.targets.size() - 1);
  return row.targets[k];
}

void KilledChain::fail_absorbing(std::size_t state) const {
  throw KillingNotAlmostSure("state " + std::to_string(q_.labels()[state]) +
                             " is absorbing and has zero killing rate");
}

void KilledChain::fail_cap(std::size_t x0, std::uint64_t cap) const {
  throw KillingNotAlmostSure("no kill within " + std::to_string(cap) + " events from state " +
                             std::to_string(q_.labels()[x0]));
}

CtmcExit sample_exit_ctmc(const KilledChain& chain, std::size_t x0, Rng& rng,
                          std::uint64_t event_cap) {
  return chain.run(x0, rng, [](std::size_t, double) {}, event_cap);
}

double invert_ray_hazard(const RateFunction& kappa, double x0, double xi) {
  if (kappa.is_table()) throw DomainError("ray inversion needs a piecewise kappa");
  if (!(x0 >= 0.0)) throw DomainError("ray start must be nonnegative");
  if (!ray_hazard_diverges(kappa))
    throw KillingNotAlmostSure("total hazard along the ray is finite");
  const auto& pieces = kappa.pieces();
  double acc = 0.0;
  double lo = x0;
  for (std::size_t k = kappa.piece_index(x0); k < pieces.size(); ++k) {
    const Polynomial& hazard = pieces[k].hazard;
    const double base = hazard(lo);
    const double need = xi - acc;
    if (k + 1 < pieces.size()) {
      const double end = pieces[k + 1].start;
      const double mass = hazard(end) - base;
      if (mass >= need) return solve_monotone(hazard, base + need, lo, end, kHazardTolerance);
      acc += mass;
      lo = end;
      continue;
    }
    double hi = lo + 1.0;
    while (hazard(hi) - base < need) hi = lo + 2.0 * (hi - lo);
    return solve_monotone(hazard, base + need, lo, hi, kHazardTolerance);
  }
  throw KillingNotAlmostSure("hazard inversion ran past the last piece");
}

RayExit exit_ray_from_threshold(const RateFunction& kappa, double x0, double xi) {
  const double x = invert_ray_hazard(kappa, x0, xi);
  return RayExit{x, x - x0, 0};
}

RayExit sample_exit_ray_inversion(const RateFunction& kappa, double x0, Rng& rng) {
  return exit_ray_from_threshold(kappa, x0, HazardAccumulator::draw(rng).threshold());
}

RayExit sample_exit_ray_thinning(const RateFunction& kappa, double x0, Rng& rng, double window,
                                 std::uint64_t event_cap) {
  if (!(window > 0.0) || !std::isfinite(window)) throw DomainError("thinning window must be positive");
  if (!(x0 >= 0.0)) throw DomainError("ray start must be nonnegative");
  if (!ray_hazard_diverges(kappa))
    throw KillingNotAlmostSure("total hazard along the ray is finite");
  std::uint64_t rejections = 0;
  std::uint64_t events = 0;
  for (std::uint64_t k = 0; events < event_cap; ++k, ++events) {
    const double t0 = static_cast<double>(k) * window;
    const double t1 = static_cast<double>(k + 1) * window;
    const double bound = rate_bound_on(kappa, x0 + t0, x0 + t1);
    if (bound <= 0.0) continue;
    double t = t0;
    while (events < event_cap) {
      t += standard_exponential(rng) / bound;
      if (t >= t1) break;
      ++events;
      const double x = x0 + t;
      if (uniform_open(rng) * bound < eval_rate(kappa, x)) return RayExit{x, t, rejections};
      ++rejections;
    }
  }
  throw KillingNotAlmostSure("no accepted point within " + std::to_string(event_cap) + " events");
}

double integrated_hazard(const RateFunction& kappa, std::span<const Dwell> path) {
  double total = 0.0;
  for (const Dwell& d : path) {
    if (!(d.dwell >= 0.0)) throw DomainError("negative dwell time");
    total += eval_rate(kappa, d.state) * d.dwell;
  }
  return total;
}

double integrated_hazard(const RateFunction& kappa, double a, double b) {
  return ray_hazard(kappa, a, b);
}

}  // namespace exitlaw
