#include <doctest.h>

#include <cmath>
#include <vector>

#include "exitlaw/errors.hpp"
#include "exitlaw/rng.hpp"
#include "exitlaw/stats.hpp"

using namespace exitlaw;

TEST_CASE("empirical distribution invariants") {
  CHECK_THROWS_AS(EmpiricalDistribution::over_labels({}, {}, 0), StatsError);
  CHECK_THROWS_AS(EmpiricalDistribution::over_labels({1, 2}, {0.5, 0.4}, 0), StatsError);
  CHECK_THROWS_AS(EmpiricalDistribution::over_labels({1, 2}, {1.5, -0.5}, 0), StatsError);
  CHECK_THROWS_AS(EmpiricalDistribution::over_bins({0.0, 0.0, 1.0}, {0.5, 0.5}, 0), StatsError);
  CHECK_NOTHROW(EmpiricalDistribution::over_bins({0.0, 1.0, INFINITY}, {0.5, 0.5}, 0));
  const auto d = EmpiricalDistribution::normalized_labels({1, 2}, {3.0, 1.0}, 4);
  CHECK(d[0] == 0.75);
  CHECK(d.n_samples() == 4);
}

TEST_CASE("histogram") {
  const std::vector<double> s{0.1, 0.2, 1.5, 7.0, -1.0};
  const std::vector<double> e{0.0, 1.0, 2.0};
  CHECK(histogram(s, e) == std::vector<double>{2.0, 1.0});
  const std::vector<double> open{0.0, 1.0, INFINITY};
  CHECK(histogram(s, open) == std::vector<double>{2.0, 2.0});
}

TEST_CASE("total variation") {
  const auto p = EmpiricalDistribution::over_labels({1, 2}, {0.75, 0.25}, 0);
  const auto q = EmpiricalDistribution::over_labels({1, 2}, {0.5, 0.5}, 0);
  CHECK(tv_distance(p, p) == 0.0);
  CHECK(tv_distance(p, q) == doctest::Approx(0.25));
  const auto a = EmpiricalDistribution::over_labels({1, 2}, {1.0, 0.0}, 0);
  const auto b = EmpiricalDistribution::over_labels({1, 2}, {0.0, 1.0}, 0);
  CHECK(tv_distance(a, b) == 1.0);
  const auto other = EmpiricalDistribution::over_labels({1, 3}, {0.5, 0.5}, 0);
  CHECK_THROWS_AS(tv_distance(p, other), StatsError);
}

TEST_CASE("kolmogorov distribution") {
  CHECK(kolmogorov_survival(0.0) == 1.0);
  CHECK(kolmogorov_survival(1.3580986393225505) == doctest::Approx(0.05).epsilon(1e-6));
  CHECK(kolmogorov_survival(1.2238478702170823) == doctest::Approx(0.10).epsilon(1e-6));
  CHECK(kolmogorov_survival(1.9494746048) == doctest::Approx(0.001).epsilon(1e-5));
  // both branches agree at the switch point
  CHECK(kolmogorov_survival(1.18 - 1e-12) == doctest::Approx(kolmogorov_survival(1.18 + 1e-12)).epsilon(1e-9));
}

TEST_CASE("one-sample KS") {
  const std::size_t n = 1000;
  std::vector<double> q(n);
  for (std::size_t i = 0; i < n; ++i) q[i] = -std::log1p(-(double(i) + 0.5) / double(n));
  const auto exp1 = [](double x) { return x <= 0 ? 0.0 : -std::expm1(-x); };
  CHECK(ks_test(q, exp1).statistic == doctest::Approx(0.5 / double(n)).epsilon(1e-9));

  Rng rng = trajectory_stream(4, 1, 0);
  std::vector<double> s(10'000);
  for (double& x : s) x = standard_exponential(rng);
  CHECK(ks_test(s, exp1).p_value > 1e-3);
  const auto exp2 = [](double x) { return x <= 0 ? 0.0 : -std::expm1(-2.0 * x); };
  CHECK(ks_test(s, exp2).p_value < 1e-6);
}

TEST_CASE("two-sample KS") {
  Rng rng = trajectory_stream(4, 2, 0);
  std::vector<double> a(5000), b(7000), c(5000);
  for (double& x : a) x = standard_exponential(rng);
  for (double& x : b) x = standard_exponential(rng);
  for (double& x : c) x = 0.5 * standard_exponential(rng);
  CHECK(ks_two_sample(a, b).p_value > 1e-3);
  CHECK(ks_two_sample(a, c).p_value < 1e-6);
  CHECK(ks_two_sample(a, a).statistic == 0.0);
}

TEST_CASE("chi-square goodness of fit") {
  const std::vector<double> half{0.5, 0.5};
  const auto r = chi_square_test(std::vector<double>{60, 40}, half);
  CHECK(r.statistic == doctest::Approx(4.0));
  CHECK(r.df == 1);
  CHECK(r.p_value == doctest::Approx(0.0455).epsilon(1e-3));
  CHECK(chi_square_test(std::vector<double>{50, 50}, half).statistic == 0.0);
  const auto exact = chi_square_test(std::vector<double>{20, 30, 50}, std::vector<double>{0.2, 0.3, 0.5});
  CHECK(exact.statistic == 0.0);
  CHECK(exact.p_value == 1.0);
  // tiny cells are pooled until each expects at least 5
  const auto pooled = chi_square_test(std::vector<double>{10, 2, 88}, std::vector<double>{0.1, 0.02, 0.88});
  CHECK(pooled.cells == 2);
  CHECK(chi_square_survival(3.841458820694124, 1.0) == doctest::Approx(0.05).epsilon(1e-9));
}

TEST_CASE("independence test") {
  Rng rng = trajectory_stream(4, 3, 0);
  std::vector<std::pair<double, double>> indep(20'000), dep(20'000);
  for (auto& p : indep) p = {standard_exponential(rng), double(rng() % 3)};
  CHECK(independence_test(indep, 4, 5).p_value > 1e-3);
  for (auto& p : dep) {
    const double t = standard_exponential(rng);
    p = {t, t > std::log(2.0) ? 1.0 : 0.0};
  }
  CHECK(independence_test(dep, 4, 5).p_value < 1e-6);
  std::vector<std::pair<double, double>> one(1000);
  for (auto& p : one) p = {standard_exponential(rng), 0.0};
  CHECK_THROWS_AS(independence_test(one, 4, 5), StatsError);
}
