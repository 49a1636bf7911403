#include <doctest.h>

#include <cmath>

#include "exitlaw/acceptance.hpp"
#include "exitlaw/errors.hpp"
#include "exitlaw/exact_solver.hpp"
#include "oracle.hpp"

using namespace exitlaw;

namespace {

const GeneratorMatrix kSym = GeneratorMatrix::from_rows({{-1, 1}, {1, -1}});

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) x(i++) = d;
  return x;
}

oracle::Matrix rows_of(const GeneratorMatrix& q) {
  oracle::Matrix m(q.size(), oracle::Vector(q.size()));
  for (std::size_t i = 0; i < q.size(); ++i)
    for (std::size_t j = 0; j < q.size(); ++j) m[i][j] = q(i, j);
  return m;
}

}  // namespace

TEST_CASE("killed generator") {
  const auto m = killed_generator(kSym, RateFunction::table({1.0, 1.0})).m;
  CHECK(m(0, 0) == -2.0);
  CHECK(m(0, 1) == 1.0);
  CHECK(m(1, 1) == -2.0);
  const auto m2 = killed_generator(kSym, RateFunction::table({2.0, 0.0})).m;
  CHECK(m2(0, 0) == -3.0);
  CHECK(m2(1, 1) == -1.0);
  CHECK_THROWS_AS(killed_generator(kSym, RateFunction::table({0.0, 0.0})), KillingNotAlmostSure);
  // killing only in a class that state 1 cannot reach
  const auto split = GeneratorMatrix::from_rows({{-1, 1}, {0, 0}});
  CHECK_THROWS_AS(killed_generator(split, RateFunction::table({1.0, 0.0})), KillingNotAlmostSure);
}

TEST_CASE("resolvent") {
  const auto kappa = RateFunction::table({1.0, 1.0});
  const Eigen::VectorXd g = resolvent_solve(kSym, kappa, vec({1.0, 0.0}));
  CHECK(g(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(g(1) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  const Eigen::VectorXd life = resolvent_solve(kSym, kappa, vec({1.0, 1.0}));
  CHECK(life(0) == doctest::Approx(1.0));
  CHECK(life(1) == doctest::Approx(1.0));
}

TEST_CASE("resolvent maps kappa to one") {
  Rng rng = trajectory_stream(99, 10, 0);
  for (int k = 0; k < 20; ++k) {
    const auto inst = random_instance(rng, 30);
    const Eigen::Map<const Eigen::VectorXd> kv(inst.kappa.values().data(), static_cast<Eigen::Index>(inst.q.size()));
    const Eigen::VectorXd g = resolvent_solve(inst.q, inst.kappa, kv);
    CHECK((g.array() - 1.0).abs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("exit law") {
  const auto kappa = RateFunction::table({1.0, 1.0});
  const Eigen::VectorXd e = exit_law_exact(kSym, kappa, point_mass(2, 0));
  CHECK(e(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(e(1) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  const Eigen::VectorXd u = exit_law_exact(kSym, kappa, vec({0.5, 0.5}));
  CHECK(u(0) == doctest::Approx(0.5));

  // constant killing started from the stationary law of Q leaves it unchanged
  const auto q3 = GeneratorMatrix::from_rows({{-2, 1, 1}, {3, -4, 1}, {1, 2, -3}});
  const auto st = oracle::stationary(rows_of(q3));
  const Eigen::VectorXd mu = vec({st[0], st[1], st[2]});
  const Eigen::VectorXd ex = exit_law_exact(q3, RateFunction::table({0.7, 0.7, 0.7}), mu);
  CHECK((ex - mu).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("exit law against the elimination oracle") {
  Rng rng = trajectory_stream(5, 10, 0);
  for (int k = 0; k < 20; ++k) {
    const auto inst = random_instance(rng, 12);
    const Eigen::Map<const Eigen::VectorXd> mu(inst.mu.data(), static_cast<Eigen::Index>(inst.mu.size()));
    const Eigen::VectorXd got = exit_law_exact(inst.q, inst.kappa, mu);
    const auto want = oracle::exit_law(rows_of(inst.q), inst.kappa.values(), inst.mu);
    for (std::size_t i = 0; i < want.size(); ++i) CHECK(got(static_cast<Eigen::Index>(i)) == doctest::Approx(want[i]).epsilon(1e-10));
    CHECK(std::abs(got.sum() - 1.0) < 1e-10);
  }
}

TEST_CASE("mean exit time") {
  CHECK(mean_exit_time_exact(kSym, RateFunction::table({1.0, 1.0}), vec({0.3, 0.7})) == doctest::Approx(1.0));
  // (K - Q) g = 1 with kappa = (1, 0) gives g = (2, 3)
  CHECK(mean_exit_time_exact(kSym, RateFunction::table({1.0, 0.0}), point_mass(2, 1)) == doctest::Approx(3.0).epsilon(1e-14));
  const auto walk = GeneratorMatrix::reflecting_walk(-20, 20);
  CHECK(mean_exit_time_exact(walk, RateFunction::table(std::vector<double>(41, 1.0)), point_mass(41, 3)) ==
        doctest::Approx(1.0));
}

TEST_CASE("resurrected generator and invariant law") {
  const auto kappa = RateFunction::table({1.0, 1.0});
  const Eigen::MatrixXd r = resurrected_generator(kSym, kappa, point_mass(2, 0));
  CHECK(r(0, 0) == -1.0);
  CHECK(r(0, 1) == 1.0);
  CHECK(r(1, 0) == 2.0);
  CHECK(r(1, 1) == -2.0);
  const Eigen::VectorXd pi = resurrected_invariant_exact(kSym, kappa, point_mass(2, 0));
  CHECK(pi(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(pi(1) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("resurrected invariant on the truncated walk has the golden tail") {
  const auto walk = GeneratorMatrix::reflecting_walk(-200, 200);
  const Eigen::VectorXd pi =
      resurrected_invariant_exact(walk, RateFunction::table(std::vector<double>(401, 1.0)), point_mass(401, 200));
  const double r = (3.0 - std::sqrt(5.0)) / 2.0;
  for (long i = 5; i <= 50; ++i) {
    const auto a = static_cast<Eigen::Index>(walk.index_of(i));
    CHECK(std::abs(pi(a + 1) / pi(a) - r) < 1e-6);
    CHECK(pi(walk.index_of(-i)) == doctest::Approx(pi(a)).epsilon(1e-12));
  }
}

TEST_CASE("resurrected invariant against the elimination oracle") {
  Rng rng = trajectory_stream(6, 10, 0);
  for (int k = 0; k < 20; ++k) {
    const auto inst = random_instance(rng, 12);
    const Eigen::Map<const Eigen::VectorXd> mu(inst.mu.data(), static_cast<Eigen::Index>(inst.mu.size()));
    const Eigen::VectorXd got = resurrected_invariant_exact(inst.q, inst.kappa, mu);
    oracle::Matrix g = rows_of(inst.q);
    for (std::size_t i = 0; i < g.size(); ++i) {
      g[i][i] -= inst.kappa.values()[i];
      for (std::size_t j = 0; j < g.size(); ++j) g[i][j] += inst.kappa.values()[i] * inst.mu[j];
    }
    const auto want = oracle::stationary(g);
    for (std::size_t i = 0; i < want.size(); ++i)
      CHECK(got(static_cast<Eigen::Index>(i)) == doctest::Approx(want[i]).epsilon(1e-9));
  }
}

TEST_CASE("class structure") {
  const auto q = GeneratorMatrix::from_rows({{-1, 1, 0, 0}, {1, -1, 0, 0}, {0, 0, -1, 1}, {0, 0, 1, -1}});
  const auto classes = communicating_classes(q.matrix());
  REQUIRE(classes.size() == 2);
  CHECK(classes[0] == std::vector<std::size_t>{0, 1});
  CHECK(closed_classes(q.matrix()).size() == 2);
  CHECK(describe_classes(classes, q.labels()).find("{2,3}") != std::string::npos);

  // rebirth into {2, 3} never returns to {0, 1}
  const Eigen::VectorXd pi = resurrected_invariant_exact(q, RateFunction::table({1.0, 1.0, 1.0, 1.0}), point_mass(4, 2));
  CHECK(pi(0) == 0.0);
  CHECK(pi(1) == 0.0);
  CHECK(pi(2) == doctest::Approx(2.0 / 3.0));
  const Eigen::MatrixXd r = resurrected_generator(q, RateFunction::table({1.0, 0.0, 1.0, 0.0}), vec({0.5, 0.0, 0.5, 0.0}));
  CHECK(closed_classes(r).size() == 1);
}

TEST_CASE("gth stationary law keeps tiny entries accurate") {
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(4, 4);
  r(0, 1) = 1e-8;
  r(1, 0) = 1.0;
  r(1, 2) = 1e-8;
  r(2, 1) = 1.0;
  r(2, 3) = 1e-8;
  r(3, 2) = 1.0;
  const Eigen::VectorXd p = gth_stationary(r);
  CHECK(p(1) / p(0) == doctest::Approx(1e-8).epsilon(1e-13));
  CHECK(p(3) / p(2) == doctest::Approx(1e-8).epsilon(1e-13));
}

TEST_CASE("quasi-stationary law") {
  const auto c = qsd_exact(kSym, RateFunction::table({1.5, 1.5}));
  CHECK(c.theta == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(c.pi(0) == doctest::Approx(0.5).epsilon(1e-12));

  const auto q = qsd_exact(kSym, RateFunction::table({2.0, 0.0}));
  const double s2 = std::sqrt(2.0);
  CHECK(q.theta == doctest::Approx(2.0 - s2).epsilon(1e-12));
  CHECK(q.pi(1) / q.pi(0) == doctest::Approx(1.0 + s2).epsilon(1e-11));
  CHECK(2.0 * q.pi(0) == doctest::Approx(2.0 - s2).epsilon(1e-12));
  CHECK(q.residual < 1e-10);
  const Eigen::VectorXd e = exit_law_exact(kSym, RateFunction::table({2.0, 0.0}), q.pi);
  CHECK(e(0) == doctest::Approx(1.0));
  CHECK(std::abs(e(1)) < 1e-15);
}

TEST_CASE("two-clock mixture") {
  const auto q = GeneratorMatrix::from_rows({{-1, 1, 0}, {1, -2, 1}, {0, 1, -1}});
  const auto kappa = RateFunction::table({1.0, 2.0, 3.0});
  const auto qsd = qsd_exact(q, kappa);
  const auto mix = qsd_mixture_decomposition(q, kappa, qsd, 1.0);
  CHECK(mix.max_abs_diff < 1e-9);
  CHECK(mix.theta_shifted == doctest::Approx(qsd.theta - 1.0));
  CHECK_THROWS_AS(qsd_mixture_decomposition(q, kappa, qsd, 1.5), DomainError);
}
