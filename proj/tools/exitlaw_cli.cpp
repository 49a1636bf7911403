#include <cstdint>
#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "exitlaw/acceptance.hpp"
#include "exitlaw/errors.hpp"
#include "exitlaw/exact_solver.hpp"
#include "exitlaw/ray_analytic.hpp"
#include "exitlaw/resurrection.hpp"
#include "exitlaw/scenario.hpp"

namespace {

using namespace exitlaw;

struct Options {
  std::string config;
  std::string preset_name;
  std::optional<std::uint64_t> seed;
  std::string out;
};

ScenarioConfig load(const Options& o) {
  if (o.config.empty() == o.preset_name.empty()) throw ConfigError("give exactly one of --config or --preset");
  ScenarioConfig cfg = o.config.empty() ? preset(o.preset_name) : load_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (!o.out.empty()) cfg.output_dir = o.out;
  return cfg;
}

EmpiricalDistribution labelled(const GeneratorMatrix& q, const Eigen::VectorXd& v) {
  std::vector<double> w(v.data(), v.data() + v.size());
  for (double& x : w) x = std::max(x, 0.0);
  return EmpiricalDistribution::normalized_labels(q.labels(), std::move(w), 0);
}

Report exact_only(const ScenarioConfig& cfg) {
  Report rep;
  rep.scenario = cfg.name;
  rep.seed = cfg.seed;
  if (cfg.model == ModelKind::kRay) {
    const double x0 = cfg.mu.position;
    const double x_max = cfg.x_max ? *cfg.x_max : choose_ray_x_max(cfg.kappa, x0, cfg.bin_width);
    const auto edges = RayBinning{cfg.bin_width, x_max}.edges();
    rep.exact_exit = EmpiricalDistribution::normalized_bins(edges, ray_exit_bins(cfg.kappa, x0, edges), 0);
    rep.exact_invariant = EmpiricalDistribution::normalized_bins(edges, ray_invariant_bins(cfg.kappa, x0, edges), 0);
    rep.reweighted_prediction = kappa_reweight(*rep.exact_invariant, cfg.kappa);
    rep.values.emplace_back("x_max", x_max);
    rep.values.emplace_back("expected_lifetime", ray_invariant_normalizer(cfg.kappa, x0));
    return rep;
  }
  Eigen::VectorXd mu;
  switch (cfg.mu.kind) {
    case StartLaw::Kind::kState: mu = point_mass(cfg.q.size(), cfg.q.index_of(cfg.mu.label)); break;
    case StartLaw::Kind::kWeights:
      mu = Eigen::Map<const Eigen::VectorXd>(cfg.mu.weights.data(), static_cast<Eigen::Index>(cfg.mu.weights.size()));
      break;
    default: {
      const QsdResult qsd = qsd_exact(cfg.q, cfg.kappa);
      rep.values.emplace_back("theta", qsd.theta);
      rep.values.emplace_back("qsd_residual", qsd.residual);
      mu = qsd.pi;
    }
  }
  const Eigen::VectorXd exit = exit_law_exact(cfg.q, cfg.kappa, mu);
  rep.add_check("exact exit law sums to 1 (R kappa = 1)", std::abs(exit.sum() - 1.0) < 1e-10,
                fmt::format("|sum - 1| = {:.3e}", std::abs(exit.sum() - 1.0)));
  rep.exact_exit = labelled(cfg.q, exit);
  rep.values.emplace_back("exact_mean_exit_time", mean_exit_time_exact(cfg.q, cfg.kappa, mu));
  try {
    rep.exact_invariant = labelled(cfg.q, resurrected_invariant_exact(cfg.q, cfg.kappa, mu));
    rep.reweighted_prediction = kappa_reweight(*rep.exact_invariant, cfg.kappa);
  } catch (const SolverError& e) {
    rep.warnings.push_back(e.what());
  }
  return rep;
}

int finish(const Report& rep, const ScenarioConfig& cfg) {
  std::fputs(format_summary(rep).c_str(), stdout);
  for (const auto& path : emit_outputs(rep, cfg.output_dir)) fmt::print("wrote {}\n", path.string());
  return rep.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exit laws of killed Markov processes and their resurrected invariant laws"};
  app.require_subcommand(1);
  Options o;
  const auto add_common = [&o](CLI::App* sub, bool scenario) {
    if (scenario) {
      sub->add_option("--config", o.config, "JSON scenario file")->check(CLI::ExistingFile);
      sub->add_option("--preset", o.preset_name, "embedded scenario name")
          ->check(CLI::IsMember(exitlaw::preset_names()));
    }
    sub->add_option("--seed", o.seed, "master seed (U64)");
    sub->add_option("--out", o.out, "output directory");
  };
  CLI::App* exact = app.add_subcommand("exact", "exact exit law and resurrected invariant law");
  CLI::App* simulate = app.add_subcommand("simulate", "exact solve, killed trajectories and resurrected cycles");
  CLI::App* qsd = app.add_subcommand("qsd", "quasi-stationary checks");
  CLI::App* ray = app.add_subcommand("ray", "unit-speed ray: inversion, thinning and resurrected occupation");
  CLI::App* check = app.add_subcommand("check", "full acceptance suite");
  for (CLI::App* sub : {exact, simulate, qsd, ray}) add_common(sub, true);
  add_common(check, false);
  CLI11_PARSE(app, argc, argv);

  try {
    if (check->parsed()) {
      const std::uint64_t seed = o.seed.value_or(42);
      const std::filesystem::path out = o.out.empty() ? std::filesystem::path("exitlaw_check") : std::filesystem::path(o.out);
      const AcceptanceRun run = run_acceptance(seed, out);
      for (const auto& c : run.criteria) fmt::print("{}\n", format_criterion(c));
      for (const auto& r : run.reports)
        for (const auto& w : r.warnings) fmt::print("[{}] {}\n", r.scenario, w);
      fmt::print("{}: tables in {}\n", run.passed() ? "PASS" : "FAIL", out.string());
      return run.passed() ? 0 : 1;
    }
    ScenarioConfig cfg = load(o);
    if (exact->parsed()) return finish(exact_only(cfg), cfg);
    if (simulate->parsed()) {
      if (cfg.model == ModelKind::kRay) return finish(run_ray_scenario(cfg), cfg);
      return finish(run_scenario(cfg), cfg);
    }
    if (qsd->parsed()) {
      cfg.mu = StartLaw{};
      cfg.mu.kind = StartLaw::Kind::kQsd;
      return finish(run_qsd_scenario(cfg), cfg);
    }
    return finish(run_ray_scenario(cfg), cfg);
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }
}
