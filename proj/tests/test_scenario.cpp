#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "exitlaw/errors.hpp"
#include "exitlaw/ray_analytic.hpp"
#include "exitlaw/scenario.hpp"

using namespace exitlaw;
using nlohmann::json;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("exitlaw_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ScenarioConfig small(std::string_view name, std::size_t kills = 20'000) {
  ScenarioConfig cfg = preset(name);
  cfg.n_kills = kills;
  return cfg;
}

}  // namespace

TEST_CASE("every preset parses") {
  for (const auto& name : preset_names()) CHECK_NOTHROW(preset(name));
  CHECK_THROWS_AS(preset("nope"), ConfigError);
  const auto walk = preset("ssrw_uniform");
  CHECK(walk.q.size() == 401);
  CHECK(walk.truncation == 200);
  const auto fks = preset("finite_kill_set");
  CHECK(fks.kappa.values()[fks.q.index_of(3)] == 2.0);
  CHECK(fks.kappa.values()[fks.q.index_of(0)] == 0.0);
}

TEST_CASE("config errors name the problem") {
  json j = preset_json("two_state");
  j["generator"]["rows"] = json::array({json::array({-1, 1}), json::array({1, 0})});
  CHECK_THROWS_WITH_AS(parse_config(j), doctest::Contains("row 1 sums to 1"), ConfigError);

  j = preset_json("two_state");
  j["mu"] = {{"state", 9}};
  CHECK_THROWS_AS(parse_config(j), ConfigError);

  j = preset_json("two_state");
  j["n_kills"] = 0;
  CHECK_THROWS_AS(parse_config(j), ConfigError);

  j = preset_json("two_state");
  j["model"] = "diffusion";
  CHECK_THROWS_AS(parse_config(j), ConfigError);

  j = preset_json("ray_linear");
  j["kappa"] = {{"values", {1, 2}}};
  CHECK_THROWS_AS(parse_config(j), ConfigError);
}

TEST_CASE("config file round trip") {
  const auto dir = scratch("config");
  std::filesystem::create_directories(dir);
  const auto path = dir / "walk.json";
  std::ofstream(path) << R"({
    // comments are allowed
    "name": "small_walk", "model": "ctmc",
    "generator": {"reflecting_walk": {"lo": -3, "hi": 3}},
    "kappa": {"by_label": {"0": 2.0}, "default": 0.5},
    "mu": {"weights": [0, 0, 0.5, 0, 0.5, 0, 0]},
    "n_kills": 500, "seed": 7
  })";
  const auto cfg = load_config(path);
  CHECK(cfg.name == "small_walk");
  CHECK(cfg.q.size() == 7);
  CHECK(cfg.kappa.values()[3] == 2.0);
  CHECK(cfg.kappa.values()[0] == 0.5);
  CHECK(cfg.mu.kind == StartLaw::Kind::kWeights);
  CHECK(cfg.seed == 7);
  CHECK_THROWS_AS(load_config(dir / "missing.json"), ConfigError);
}

TEST_CASE("two_state scenario") {
  const Report r = run_scenario(small("two_state", 100'000));
  REQUIRE(r.exact_exit);
  CHECK((*r.exact_exit)[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(*r.value("tv_empirical_vs_exact_exit") < 0.01);
  CHECK(*r.value("tv_reweighted_vs_empirical_exit") < 0.01);
  CHECK(r.check("TV triangle inequality across the three laws")->passed);
  CHECK(r.passed());
}

TEST_CASE("ssrw scenario: exit law equals resurrected invariant") {
  const Report r = run_scenario(small("ssrw_uniform"));
  REQUIRE(r.exact_exit);
  REQUIRE(r.exact_invariant);
  CHECK(tv_distance(*r.exact_exit, *r.exact_invariant) < 1e-12);
  const auto& labels = r.exact_exit->labels();
  const auto at = [&](long i) {
    return (*r.exact_exit)[static_cast<std::size_t>(std::find(labels.begin(), labels.end(), i) - labels.begin())];
  };
  CHECK(at(6) / at(5) == doctest::Approx(0.381966).epsilon(1e-5));
  CHECK(r.passed());
}

TEST_CASE("finite kill set warns and keeps the exit comparison") {
  const Report r = run_scenario(small("finite_kill_set", 40'000));
  CHECK(r.check("empirical exit law matches exact exit law")->passed);
  REQUIRE_FALSE(r.warnings.empty());
  CHECK(r.warnings.front().rfind("WARNING", 0) == 0);
  CHECK(r.check("kappa-reweighted resurrected law matches empirical exit law") == nullptr);
}

TEST_CASE("quasi-stationary scenarios") {
  const Report c = run_qsd_scenario(preset("qsd_constant"));
  CHECK(*c.value("theta") == doctest::Approx(1.5).epsilon(1e-12));
  CHECK((*c.exact_exit)[0] == doctest::Approx(0.5));
  CHECK(c.passed());

  const Report a = run_qsd_scenario(preset("qsd_two_state"));
  CHECK(*a.value("theta") == doctest::Approx(2.0 - std::sqrt(2.0)).epsilon(1e-12));
  CHECK((*a.exact_exit)[0] == doctest::Approx(1.0));
  CHECK(a.check("kill time independent of kill location (chi-square)") == nullptr);
  CHECK(a.passed());

  const Report m = run_qsd_scenario(preset("path3_mixture"));
  CHECK(*m.value("mixture_max_diff") < 1e-9);
  CHECK(m.passed());
}

TEST_CASE("ray scenarios") {
  ScenarioConfig cfg = preset("ray_linear");
  cfg.n_kills = 20'000;
  const Report r = run_ray_scenario(cfg);
  CHECK(r.passed());
  // resurrected occupation against the half-normal density
  const auto& edges = r.resurrected_invariant->edges();
  double tv = 0.0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double hi = std::isinf(edges[i + 1]) ? 1.0 : std::erf(edges[i + 1] / std::sqrt(2.0));
    tv += std::abs((*r.resurrected_invariant)[i] - (hi - std::erf(edges[i] / std::sqrt(2.0))));
  }
  CHECK(tv / 2.0 < 0.02);

  json j = preset_json("ray_constant");
  j["kappa"] = {{"pieces", {{0, {1}}, {2, json::array()}}}};
  CHECK_THROWS_AS(run_ray_scenario(parse_config(j)), KillingNotAlmostSure);
}

TEST_CASE("closed-form ray laws") {
  const auto lin = RateFunction::polynomial({0.0, 1.0});
  CHECK(ray_exit_cdf(lin, 0.0, 1.0) == doctest::Approx(1.0 - std::exp(-0.5)));
  CHECK(ray_invariant_normalizer(lin, 0.0) == doctest::Approx(std::sqrt(M_PI / 2.0)).epsilon(1e-10));
  CHECK(ray_invariant_normalizer(RateFunction::polynomial({2.0}), 1.0) == doctest::Approx(0.5).epsilon(1e-12));
  const double x_max = choose_ray_x_max(lin, 0.0, 0.05);
  CHECK(std::exp(-x_max * x_max / 2.0) < 1e-6);
  CHECK(std::exp(-(x_max - 0.05) * (x_max - 0.05) / 2.0) >= 1e-6 * 0.9);
}

TEST_CASE("outputs") {
  const auto dir = scratch("outputs");
  const Report r = run_scenario(small("two_state"));
  const auto files = emit_outputs(r, dir);
  CHECK(files.size() == 3);
  for (const auto& f : files) CHECK(std::filesystem::exists(f));
  const std::string table = slurp(dir / "two_state_table.csv");
  CHECK(table.rfind("label_or_bin_left,bin_right,exact,empirical_exit,reweighted_resurrected\n", 0) == 0);
  CHECK(slurp(dir / "two_state_summary.txt").find("PASS") != std::string::npos);
  CHECK(slurp(dir / "two_state_exit.svg").rfind("<svg", 0) == 0);

  const auto again = scratch("outputs_again");
  emit_outputs(run_scenario(small("two_state")), again);
  CHECK(slurp(again / "two_state_table.csv") == table);

  Report empty;
  empty.scenario = "empty";
  empty.exact_exit = EmpiricalDistribution{};
  const auto refused = scratch("outputs_refused");
  CHECK_THROWS_AS(emit_outputs(empty, refused), DomainError);
  CHECK_FALSE(std::filesystem::exists(refused));
}

TEST_CASE("states must lie inside the truncation") {
  json j = preset_json("ssrw_uniform");
  j["truncation"] = 100;
  CHECK_THROWS_WITH_AS(parse_config(j), doctest::Contains("outside the truncation"), ConfigError);
}
