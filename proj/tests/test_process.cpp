#include <doctest.h>

#include <cmath>

#include "exitlaw/errors.hpp"
#include "exitlaw/polynomial.hpp"
#include "exitlaw/process.hpp"

using namespace exitlaw;

TEST_CASE("generator validation") {
  CHECK(validate_generator(GeneratorMatrix::from_rows({{-1, 1}, {1, -1}})).ok);

  const auto rowsum = validate_generator(GeneratorMatrix::from_rows({{-1, 1}, {1, 0}}));
  CHECK_FALSE(rowsum.ok);
  CHECK(rowsum.row == 1);
  CHECK(rowsum.message.find("row 1 sums to 1") != std::string::npos);

  const auto sign = validate_generator(GeneratorMatrix::from_rows({{-1, 1}, {-1, 1}}));
  CHECK_FALSE(sign.ok);
  CHECK(sign.row == 1);
  CHECK(sign.col == 0);
  CHECK(sign.message.find("q[1][0]") != std::string::npos);

  CHECK_FALSE(validate_generator(GeneratorMatrix::from_rows({{0}})).ok);
  CHECK_FALSE(validate_generator(GeneratorMatrix::from_rows({{-1, NAN}, {1, -1}})).ok);
  CHECK_THROWS_AS(require_valid(GeneratorMatrix::from_rows({{-1, 1}, {1, 0}})), DomainError);
}

TEST_CASE("reflecting walk") {
  const auto q = GeneratorMatrix::reflecting_walk(-2, 2, 1.0);
  REQUIRE(q.size() == 5);
  CHECK(validate_generator(q).ok);
  CHECK(q.labels().front() == -2);
  CHECK(q.index_of(0) == 2);
  CHECK(q(0, 1) == 1.0);
  CHECK(q.exit_rate(0) == 1.0);
  CHECK(q.exit_rate(2) == 2.0);
  CHECK_THROWS_AS(q.index_of(7), DomainError);
}

TEST_CASE("rate lookup") {
  const auto table = RateFunction::table({1.0, 1.0});
  CHECK(eval_rate(table, std::size_t{0}) == 1.0);
  CHECK_THROWS_AS(eval_rate(table, std::size_t{2}), DomainError);
  CHECK_THROWS_AS(RateFunction::table({1.0, -0.5}), DomainError);

  CHECK(eval_rate(RateFunction::polynomial({0, 1}), 2.5) == 2.5);
  CHECK(eval_rate(RateFunction::polynomial({0, 0, 1}), 3.0) == doctest::Approx(9.0));
  CHECK_THROWS_AS(eval_rate(RateFunction::polynomial({1}), -1.0), DomainError);

  const auto steps = RateFunction::piecewise({{0.0, Polynomial({1.0}), {}}, {2.0, Polynomial({3.0}), {}}});
  CHECK(eval_rate(steps, 1.999) == 1.0);
  CHECK(eval_rate(steps, 2.0) == 3.0);
}

TEST_CASE("piecewise validation") {
  CHECK_THROWS_AS(RateFunction::piecewise({}), DomainError);
  CHECK_THROWS_AS(RateFunction::piecewise({{1.0, Polynomial({1.0}), {}}}), DomainError);
  CHECK_THROWS_AS(RateFunction::piecewise({{0.0, Polynomial({1.0}), {}}, {0.0, Polynomial({1.0}), {}}}), DomainError);
  // x - 1 dips below zero on [0, 1)
  CHECK_THROWS_AS(RateFunction::polynomial({-1.0, 1.0}), DomainError);
  // 1 - x is fine on [0, 1) when a later piece takes over
  CHECK_NOTHROW(RateFunction::piecewise({{0.0, Polynomial({1.0, -1.0}), {}}, {1.0, Polynomial({2.0}), {}}}));
}

TEST_CASE("rate bounds on windows") {
  CHECK(rate_bound_on(RateFunction::polynomial({0, 1}), 0.0, 4.0) == doctest::Approx(4.0));
  CHECK(rate_bound_on(RateFunction::polynomial({1}), 2.0, 7.0) == 1.0);
  const auto hump = RateFunction::piecewise({{0.0, Polynomial({0, 4, -1}), {}}, {4.0, Polynomial({1.0}), {}}});
  CHECK(rate_bound_on(hump, 0.0, 4.0) == doctest::Approx(4.0));
  CHECK(rate_bound_on(hump, 0.0, 1.0) == doctest::Approx(3.0));
  CHECK_THROWS_AS(rate_bound_on(hump, 1.0, 1.0), DomainError);
}

TEST_CASE("integrated hazard along the ray") {
  CHECK(ray_hazard(RateFunction::polynomial({0, 1}), 0.0, 2.0) == doctest::Approx(2.0));
  CHECK(ray_hazard(RateFunction::polynomial({0, 0, 1}), 1.0, 3.0) == doctest::Approx(26.0 / 3.0).epsilon(1e-14));
  const auto steps = RateFunction::piecewise({{0.0, Polynomial({1.0}), {}}, {2.0, Polynomial({3.0}), {}}});
  CHECK(ray_hazard(steps, 1.0, 4.0) == doctest::Approx(1.0 + 6.0));
  CHECK(ray_hazard_diverges(steps));
  CHECK_FALSE(ray_hazard_diverges(RateFunction::piecewise({{0.0, Polynomial({1.0}), {}}, {2.0, Polynomial(), {}}})));
}

TEST_CASE("polynomial tools") {
  const Polynomial p({-2.0, 0.0, 1.0});  // x^2 - 2
  const auto r = p.roots_in(0.0, 3.0);
  REQUIRE(r.size() == 1);
  CHECK(r[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-13));
  CHECK(Polynomial({0, 4, -1}).max_on(0.0, 4.0) == doctest::Approx(4.0));
  CHECK(Polynomial({0, 4, -1}).min_on(0.0, 4.0) == doctest::Approx(0.0));
  CHECK(Polynomial({1, 2, 3}).antiderivative()(1.0) == doctest::Approx(3.0));
  CHECK(Polynomial({1, 2, 3}).derivative().coeffs() == std::vector<double>{2, 6});
  CHECK(Polynomial({1, 0, 0}).degree() == 0);

  const Polynomial cube({0, 0, 0, 1.0 / 3.0});
  const double x = solve_monotone(cube, 9.0, 0.0, 10.0, 1e-12);
  CHECK(x == doctest::Approx(3.0).epsilon(1e-12));
}
