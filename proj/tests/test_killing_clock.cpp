#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "exitlaw/errors.hpp"
#include "exitlaw/killing_clock.hpp"
#include "exitlaw/sampling.hpp"
#include "exitlaw/stats.hpp"

using namespace exitlaw;

namespace {

const GeneratorMatrix kSym = GeneratorMatrix::from_rows({{-1, 1}, {1, -1}});

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size()); }

}  // namespace

TEST_CASE("hazard accumulator") {
  HazardAccumulator h(2.0);
  h.add(0.5);
  CHECK_FALSE(h.fired());
  CHECK(h.remaining() == 1.5);
  CHECK(h.survival_weight() == doctest::Approx(std::exp(-0.5)));
  h.add(1.5);
  CHECK(h.fired());
  CHECK_THROWS_AS(h.add(-1.0), DomainError);
  CHECK_THROWS_AS(HazardAccumulator(0.0), DomainError);
}

TEST_CASE("integrated hazard along chain paths") {
  const auto kappa = RateFunction::table({1.0, 3.0});
  const std::vector<Dwell> path{{0, 2.0}};
  CHECK(integrated_hazard(kappa, path) == 2.0);
  const std::vector<Dwell> two{{0, 2.0}, {1, 0.5}};
  CHECK(integrated_hazard(kappa, two) == 3.5);
  CHECK(integrated_hazard(RateFunction::polynomial({0, 1}), 0.0, 2.0) == doctest::Approx(2.0));
}

TEST_CASE("killed chain construction") {
  CHECK_THROWS_AS(KilledChain(kSym, RateFunction::table({1.0})), DomainError);
  CHECK_THROWS_AS(KilledChain(kSym, RateFunction::polynomial({1.0})), DomainError);
}

TEST_CASE("absorbing state without killing is reported") {
  const KilledChain chain(GeneratorMatrix::from_rows({{-1, 1}, {0, 0}}), RateFunction::table({1.0, 0.0}));
  bool reached = false;
  for (std::uint64_t i = 0; i < 50 && !reached; ++i) {
    Rng rng = trajectory_stream(1, 1, i);
    try {
      sample_exit_ctmc(chain, 0, rng);
    } catch (const KillingNotAlmostSure& e) {
      reached = true;
      CHECK(std::string(e.what()).rfind("killing not almost sure", 0) == 0);
    }
  }
  CHECK(reached);
}

TEST_CASE("event cap stops a chain that is never killed") {
  const KilledChain chain(kSym, RateFunction::table({0.0, 0.0}));
  Rng rng = trajectory_stream(1, 1, 0);
  CHECK_THROWS_AS(sample_exit_ctmc(chain, 0, rng, 1000), KillingNotAlmostSure);
}

TEST_CASE("two-state chain: Exp(1) lifetime and exit law (2/3, 1/3)") {
  const KilledChain chain(kSym, RateFunction::table({1.0, 1.0}));
  const std::size_t n = 40'000;
  const auto batch = sample_chain_exits(chain, RebirthMeasure::state(2, 0), n, 7);
  const auto ks = ks_test(batch.time, [](double t) { return t <= 0 ? 0.0 : -std::expm1(-t); });
  CHECK(ks.p_value > 1e-3);
  const double first = double(std::count(batch.location.begin(), batch.location.end(), 0)) / double(n);
  const double se = std::sqrt(2.0 / 9.0 / double(n));
  CHECK(std::abs(first - 2.0 / 3.0) < 4 * se);
  CHECK(std::abs(mean(batch.hazard) - 1.0) < 4 * std::sqrt(1.0 / double(n)));
}

TEST_CASE("chain sampling is independent of the worker count") {
  const KilledChain chain(GeneratorMatrix::reflecting_walk(-5, 5), RateFunction::table(std::vector<double>(11, 0.3)));
  const auto start = RebirthMeasure::state(11, 5);
  setenv("EXITLAW_THREADS", "1", 1);
  const auto one = sample_chain_exits(chain, start, 5000, 3);
  setenv("EXITLAW_THREADS", "4", 1);
  const auto four = sample_chain_exits(chain, start, 5000, 3);
  unsetenv("EXITLAW_THREADS");
  CHECK(one.location == four.location);
  CHECK(one.time == four.time);
}

TEST_CASE("deterministic ray inversion") {
  const auto one = RateFunction::polynomial({1.0});
  const RayExit e = exit_ray_from_threshold(one, 0.0, 0.5);
  CHECK(e.location == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(e.time == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(exit_ray_from_threshold(one, 2.0, 0.5).location == doctest::Approx(2.5).epsilon(1e-12));

  const auto lin = RateFunction::polynomial({0.0, 1.0});
  CHECK(invert_ray_hazard(lin, 0.0, 2.0) == doctest::Approx(2.0).epsilon(1e-12));  // x^2 / 2 = 2

  const auto steps = RateFunction::piecewise({{0.0, Polynomial({1.0}), {}}, {1.0, Polynomial({2.0}), {}}});
  CHECK(invert_ray_hazard(steps, 0.0, 2.0) == doctest::Approx(1.5).epsilon(1e-12));

  const auto dies = RateFunction::piecewise({{0.0, Polynomial({1.0}), {}}, {1.0, Polynomial(), {}}});
  CHECK_THROWS_AS(invert_ray_hazard(dies, 0.0, 2.0), KillingNotAlmostSure);
}

TEST_CASE("ray samplers") {
  const std::size_t n = 100'000;
  const auto one = RateFunction::polynomial({1.0});
  const auto lin = RateFunction::polynomial({0.0, 1.0});

  const auto exp_inv = sample_ray_exits(one, 0.0, n, RayMethod::kInversion, 1.0, 11, kStageExit);
  CHECK(std::abs(mean(exp_inv.location) - 1.0) < 0.01);

  const auto exp_thin = sample_ray_exits(one, 0.0, n, RayMethod::kThinning, 1.0, 11, kStageThinning);
  CHECK(exp_thin.rejections == 0);

  const auto ray_inv = sample_ray_exits(lin, 0.0, n, RayMethod::kInversion, 1.0, 11, kStageExit);
  const auto ray_thin = sample_ray_exits(lin, 0.0, n, RayMethod::kThinning, 1.0, 11, kStageThinning);
  CHECK(std::abs(mean(ray_inv.location) - std::sqrt(M_PI / 2.0)) < 4 * std::sqrt((2.0 - M_PI / 2.0) / double(n)));
  CHECK(ks_two_sample(ray_inv.location, ray_thin.location).p_value > 1e-3);
  CHECK(ray_thin.rejections > 0);
  CHECK(ray_inv.location == ray_inv.time);
}

TEST_CASE("thinning with a finite total hazard hits the cap") {
  const auto dies = RateFunction::piecewise({{0.0, Polynomial({1e-9}), {}}, {1.0, Polynomial(), {}}});
  Rng rng = trajectory_stream(5, 3, 0);
  CHECK_THROWS_AS(sample_exit_ray_thinning(dies, 0.0, rng, 1.0, 1000), KillingNotAlmostSure);
}
