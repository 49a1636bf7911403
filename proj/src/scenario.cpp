#include "exitlaw/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include <fmt/format.h>

#include "exitlaw/errors.hpp"
#include "exitlaw/exact_solver.hpp"
#include "exitlaw/ray_analytic.hpp"
#include "exitlaw/resurrection.hpp"
#include "exitlaw/sampling.hpp"

namespace exitlaw {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Config parsing

namespace {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("key '{}': {}", key, e.what()));
  }
}

GeneratorMatrix parse_generator(const json& g) {
  if (g.contains("reflecting_walk")) {
    const json& w = g.at("reflecting_walk");
    const long lo = get_or<long>(w, "lo", 0);
    const long hi = get_or<long>(w, "hi", 0);
    return GeneratorMatrix::reflecting_walk(lo, hi, get_or<double>(w, "rate", 1.0));
  }
  if (!g.contains("rows")) throw ConfigError("generator needs 'rows' or 'reflecting_walk'");
  const auto rows = g.at("rows").get<std::vector<std::vector<double>>>();
  const auto labels = get_or<std::vector<long>>(g, "labels", {});
  return GeneratorMatrix::from_rows(rows, labels);
}

RateFunction parse_kappa(const json& k, const ScenarioConfig& cfg) {
  if (k.contains("pieces")) {
    std::vector<RatePiece> pieces;
    for (const json& p : k.at("pieces")) {
      if (!p.is_array() || p.size() != 2) throw ConfigError("kappa piece must be [breakpoint, [coefficients]]");
      pieces.push_back(RatePiece{p[0].get<double>(), Polynomial(p[1].get<std::vector<double>>()), {}});
    }
    return RateFunction::piecewise(std::move(pieces));
  }
  if (cfg.model == ModelKind::kRay) throw ConfigError("ray kappa needs 'pieces'");
  const std::size_t n = cfg.q.size();
  if (k.contains("values")) return RateFunction::table(k.at("values").get<std::vector<double>>());
  if (k.contains("constant")) return RateFunction::table(std::vector<double>(n, k.at("constant").get<double>()));
  if (k.contains("by_label")) {
    std::vector<double> v(n, get_or<double>(k, "default", 0.0));
    for (const auto& [label, rate] : k.at("by_label").items())
      v[cfg.q.index_of(std::stol(label))] = rate.get<double>();
    return RateFunction::table(std::move(v));
  }
  throw ConfigError("kappa needs one of 'values', 'constant', 'by_label', 'pieces'");
}

StartLaw parse_mu(const json& m) {
  StartLaw s;
  if (m.is_string()) {
    if (m.get<std::string>() != "qsd") throw ConfigError("mu string must be \"qsd\"");
    s.kind = StartLaw::Kind::kQsd;
  } else if (m.contains("state")) {
    s.kind = StartLaw::Kind::kState;
    s.label = m.at("state").get<long>();
  } else if (m.contains("weights")) {
    s.kind = StartLaw::Kind::kWeights;
    s.weights = m.at("weights").get<std::vector<double>>();
  } else if (m.contains("position")) {
    s.kind = StartLaw::Kind::kPosition;
    s.position = m.at("position").get<double>();
  } else {
    throw ConfigError("mu needs 'state', 'weights', 'position' or \"qsd\"");
  }
  return s;
}

}  // namespace

ScenarioConfig parse_config(const json& j) {
  ScenarioConfig cfg;
  try {
    cfg.name = get_or<std::string>(j, "name", cfg.name);
    const std::string model = get_or<std::string>(j, "model", "ctmc");
    if (model == "ctmc") {
      cfg.model = ModelKind::kCtmc;
    } else if (model == "ray") {
      cfg.model = ModelKind::kRay;
    } else {
      throw ConfigError("model must be \"ctmc\" or \"ray\"");
    }
    if (cfg.model == ModelKind::kCtmc) {
      if (!j.contains("generator")) throw ConfigError("ctmc scenario needs 'generator'");
      cfg.q = parse_generator(j.at("generator"));
      const auto rep = validate_generator(cfg.q);
      if (!rep.ok) throw ConfigError("generator: " + rep.message);
    }
    if (!j.contains("kappa")) throw ConfigError("scenario needs 'kappa'");
    cfg.kappa = parse_kappa(j.at("kappa"), cfg);
    if (cfg.model == ModelKind::kCtmc && cfg.kappa.values().size() != cfg.q.size())
      throw ConfigError("kappa table size does not match the generator");

    if (j.contains("mu")) {
      cfg.mu = parse_mu(j.at("mu"));
    } else if (cfg.model == ModelKind::kRay) {
      cfg.mu.kind = StartLaw::Kind::kPosition;
    }
    if (cfg.model == ModelKind::kRay && cfg.mu.kind != StartLaw::Kind::kPosition)
      throw ConfigError("ray scenario needs mu = {\"position\": x0}");
    if (cfg.model == ModelKind::kCtmc && cfg.mu.kind == StartLaw::Kind::kPosition)
      throw ConfigError("ctmc scenario cannot start from a ray position");
    if (cfg.mu.kind == StartLaw::Kind::kState) cfg.q.index_of(cfg.mu.label);
    if (cfg.mu.kind == StartLaw::Kind::kWeights && cfg.mu.weights.size() != cfg.q.size())
      throw ConfigError("mu weights size does not match the generator");

    cfg.truncation = get_or<long>(j, "truncation", 0);
    if (cfg.truncation < 0) throw ConfigError("truncation must be >= 0");
    if (cfg.truncation > 0 && cfg.model == ModelKind::kCtmc) {
      for (long label : cfg.q.labels())
        if (std::abs(label) > cfg.truncation)
          throw ConfigError(fmt::format("state {0} lies outside the truncation {{-{1}..{1}}}", label, cfg.truncation));
    }
    cfg.n_kills = get_or<std::size_t>(j, "n_kills", cfg.n_kills);
    cfg.n_regen_cycles = get_or<std::size_t>(j, "n_regen_cycles", cfg.n_regen_cycles);
    if (cfg.n_kills < 1 || cfg.n_regen_cycles < 1) throw ConfigError("n_kills and n_regen_cycles must be >= 1");
    cfg.seed = get_or<std::uint64_t>(j, "seed", cfg.seed);
    cfg.bin_width = get_or<double>(j, "bin_width", cfg.bin_width);
    if (j.contains("x_max") && !j.at("x_max").is_null()) cfg.x_max = j.at("x_max").get<double>();
    cfg.thinning_window = get_or<double>(j, "thinning_window", cfg.thinning_window);
    cfg.tv_exit_threshold = get_or<double>(j, "tv_exit_threshold", cfg.tv_exit_threshold);
    cfg.tv_resurrected_threshold = get_or<double>(j, "tv_resurrected_threshold", cfg.tv_resurrected_threshold);
    cfg.alpha = get_or<double>(j, "alpha", cfg.alpha);
    if (j.contains("mixture_eps") && !j.at("mixture_eps").is_null()) cfg.mixture_eps = j.at("mixture_eps").get<double>();
    cfg.time_bins = get_or<std::size_t>(j, "time_bins", cfg.time_bins);
    cfg.location_bins = get_or<std::size_t>(j, "location_bins", cfg.location_bins);
    cfg.output_dir = get_or<std::string>(j, "output_dir", cfg.output_dir.string());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return parse_config(j);
}

// ---------------------------------------------------------------------------
// Presets

namespace {

const std::map<std::string, json, std::less<>>& presets() {
  static const std::map<std::string, json, std::less<>> table = [] {
    std::map<std::string, json, std::less<>> m;
    m["two_state"] = R"({
      "name": "two_state", "model": "ctmc",
      "generator": {"rows": [[-1, 1], [1, -1]], "labels": [1, 2]},
      "kappa": {"values": [1, 1]}, "mu": {"state": 1},
      "n_kills": 100000, "n_regen_cycles": 10000, "seed": 42,
      "tv_exit_threshold": 0.01, "tv_resurrected_threshold": 0.02
    })"_json;
    m["ssrw_uniform"] = R"({
      "name": "ssrw_uniform", "model": "ctmc",
      "generator": {"reflecting_walk": {"lo": -200, "hi": 200, "rate": 1}},
      "truncation": 200,
      "kappa": {"constant": 1}, "mu": {"state": 0},
      "n_kills": 100000, "n_regen_cycles": 10000, "seed": 42,
      "tv_exit_threshold": 0.01, "tv_resurrected_threshold": 0.02
    })"_json;
    m["finite_kill_set"] = R"({
      "name": "finite_kill_set", "model": "ctmc",
      "generator": {"reflecting_walk": {"lo": -200, "hi": 200, "rate": 1}},
      "truncation": 200,
      "kappa": {"by_label": {"1": 0.5, "2": 1.0, "3": 2.0}, "default": 0},
      "mu": {"state": 0},
      "n_kills": 100000, "n_regen_cycles": 10000, "seed": 42,
      "tv_exit_threshold": 0.015, "tv_resurrected_threshold": 0.02
    })"_json;
    m["qsd_two_state"] = R"({
      "name": "qsd_two_state", "model": "ctmc",
      "generator": {"rows": [[-1, 1], [1, -1]], "labels": [1, 2]},
      "kappa": {"values": [2, 0]}, "mu": "qsd",
      "n_kills": 10000, "n_regen_cycles": 10000, "seed": 42,
      "tv_exit_threshold": 0.02, "tv_resurrected_threshold": 0.02
    })"_json;
    m["qsd_constant"] = R"({
      "name": "qsd_constant", "model": "ctmc",
      "generator": {"rows": [[-1, 1], [1, -1]], "labels": [1, 2]},
      "kappa": {"values": [1.5, 1.5]}, "mu": "qsd",
      "n_kills": 10000, "n_regen_cycles": 10000, "seed": 42,
      "tv_exit_threshold": 0.02, "tv_resurrected_threshold": 0.02
    })"_json;
    m["qsd_random5"] = R"({
      "name": "qsd_random5", "model": "ctmc",
      "generator": {"rows": [
        [-6.383, 1.321, 1.535, 1.631, 1.896],
        [1.532, -4.682, 1.86, 0.252, 1.038],
        [1.898, 1.368, -5.492, 1.822, 0.404],
        [1.044, 0.644, 1.179, -4.1, 1.233],
        [0.224, 0.59, 0.703, 1.849, -3.366]]},
      "kappa": {"values": [2.321, 0.563, 2.412, 0.502, 1.891]}, "mu": "qsd",
      "n_kills": 10000, "n_regen_cycles": 10000, "seed": 42,
      "tv_exit_threshold": 0.02, "tv_resurrected_threshold": 0.02
    })"_json;
    m["path3_mixture"] = R"({
      "name": "path3_mixture", "model": "ctmc",
      "generator": {"rows": [[-1, 1, 0], [1, -2, 1], [0, 1, -1]], "labels": [1, 2, 3]},
      "kappa": {"values": [1, 2, 3]}, "mu": "qsd", "mixture_eps": 1,
      "n_kills": 10000, "n_regen_cycles": 10000, "seed": 42,
      "tv_exit_threshold": 0.02, "tv_resurrected_threshold": 0.02
    })"_json;
    m["ray_constant"] = R"({
      "name": "ray_constant", "model": "ray",
      "kappa": {"pieces": [[0, [1]]]}, "mu": {"position": 0},
      "n_kills": 100000, "n_regen_cycles": 10000, "seed": 42,
      "bin_width": 0.05, "thinning_window": 1.0,
      "tv_exit_threshold": 0.02, "tv_resurrected_threshold": 0.02
    })"_json;
    m["ray_linear"] = R"({
      "name": "ray_linear", "model": "ray",
      "kappa": {"pieces": [[0, [0, 1]]]}, "mu": {"position": 0},
      "n_kills": 100000, "n_regen_cycles": 10000, "seed": 42,
      "bin_width": 0.05, "thinning_window": 1.0,
      "tv_exit_threshold": 0.02, "tv_resurrected_threshold": 0.02
    })"_json;
    return m;
  }();
  return table;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, _] : presets()) names.push_back(name);
  return names;
}

const json& preset_json(std::string_view name) {
  const auto it = presets().find(name);
  if (it == presets().end()) throw ConfigError("unknown preset '" + std::string(name) + "'");
  return it->second;
}

ScenarioConfig preset(std::string_view name) { return parse_config(preset_json(name)); }

// ---------------------------------------------------------------------------
// Report helpers

bool Report::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

const CheckResult* Report::check(std::string_view name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

std::optional<double> Report::value(std::string_view name) const {
  for (const auto& [k, v] : values)
    if (k == name) return v;
  return std::nullopt;
}

void Report::add_check(std::string name, bool passed, std::string detail) {
  checks.push_back(CheckResult{std::move(name), passed, std::move(detail)});
}

// ---------------------------------------------------------------------------
// Pipelines

namespace {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

EmpiricalDistribution state_law(const GeneratorMatrix& q, const Eigen::VectorXd& v, std::uint64_t n) {
  std::vector<double> w(v.data(), v.data() + v.size());
  for (double& x : w)
    if (x < 0.0) x = 0.0;  // rounding noise in far tails
  return EmpiricalDistribution::normalized_labels(q.labels(), std::move(w), n);
}

EmpiricalDistribution location_counts(const GeneratorMatrix& q, const std::vector<std::size_t>& loc) {
  std::vector<double> counts(q.size(), 0.0);
  for (std::size_t s : loc) counts[s] += 1.0;
  return EmpiricalDistribution::normalized_labels(q.labels(), std::move(counts), loc.size());
}

std::vector<double> counts_of(const EmpiricalDistribution& d) {
  std::vector<double> c(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) c[i] = d[i] * static_cast<double>(d.n_samples());
  return c;
}

Eigen::VectorXd start_vector(const ScenarioConfig& cfg) {
  switch (cfg.mu.kind) {
    case StartLaw::Kind::kState:
      return point_mass(cfg.q.size(), cfg.q.index_of(cfg.mu.label));
    case StartLaw::Kind::kWeights:
      return Eigen::Map<const Eigen::VectorXd>(cfg.mu.weights.data(), static_cast<Eigen::Index>(cfg.mu.weights.size()));
    case StartLaw::Kind::kQsd:
      return qsd_exact(cfg.q, cfg.kappa).pi;
    case StartLaw::Kind::kPosition:
      break;
  }
  throw ConfigError("scenario start is not a chain law");
}

// Monte Carlo version of R kappa = 1: the hazard collected before the kill
// averages to one.
void hazard_mean_check(Report& rep, const std::vector<double>& hazard) {
  const double n = static_cast<double>(hazard.size());
  const double mean = std::accumulate(hazard.begin(), hazard.end(), 0.0) / n;
  double ss = 0.0;
  for (double h : hazard) ss += (h - mean) * (h - mean);
  const double se = std::sqrt(ss / (n - 1.0) / n);
  rep.values.emplace_back("mean_integrated_hazard", mean);
  rep.add_check("integrated hazard mean = 1 (3 sigma)", std::abs(mean - 1.0) <= 3.0 * se,
                fmt::format("mean {:.6f}, sigma {:.6f}", mean, se));
}

void resurrected_checks(Report& rep, const ScenarioConfig& cfg, const RegenerationLog& log,
                        const RateFunction& kappa) {
  log.check();
  const IntegrabilityDiagnostic diag = integrability_diagnostic(log);
  rep.values.emplace_back("cycle_mean_length", diag.mean_length);
  rep.values.emplace_back("cycle_relative_std_error", diag.relative_std_error);
  rep.values.emplace_back("cycle_half_drift", diag.half_drift);
  rep.values.emplace_back("cycle_max_share", diag.max_cycle_share);

  const double k = static_cast<double>(log.cycles());
  const double rho = lag1_autocorrelation(log.cycle_lengths());
  rep.values.emplace_back("cycle_lag1_autocorrelation", rho);

  rep.resurrected_invariant = invariant_estimate(log);
  rep.reweighted_prediction = kappa_reweight(*rep.resurrected_invariant, kappa);
  if (!diag.converged) {
    rep.warnings.push_back(diag.message);
    return;
  }
  rep.add_check("cycle lengths uncorrelated (|lag-1| <= 3/sqrt(K))", std::abs(rho) <= 3.0 / std::sqrt(k),
                fmt::format("lag-1 autocorrelation {:.5f}, bound {:.5f}", rho, 3.0 / std::sqrt(k)));
  const double tv = tv_distance(*rep.reweighted_prediction, *rep.empirical_exit);
  rep.values.emplace_back("tv_reweighted_vs_empirical_exit", tv);
  rep.add_check("kappa-reweighted resurrected law matches empirical exit law",
                tv < cfg.tv_resurrected_threshold,
                fmt::format("TV {:.6f} < {}", tv, cfg.tv_resurrected_threshold));
}

}  // namespace

Report run_scenario(const ScenarioConfig& cfg) {
  if (cfg.model != ModelKind::kCtmc) throw ConfigError("run_scenario needs a ctmc scenario");
  if (cfg.mu.kind == StartLaw::Kind::kQsd) return run_qsd_scenario(cfg);
  Report rep;
  rep.scenario = cfg.name;
  rep.seed = cfg.seed;
  const Eigen::VectorXd mu = start_vector(cfg);

  // (a) exact
  Stopwatch exact_clock;
  const Eigen::VectorXd exit = exit_law_exact(cfg.q, cfg.kappa, mu);
  rep.values.emplace_back("exact_exit_mass", exit.sum());
  rep.add_check("exact exit law sums to 1 (R kappa = 1)", std::abs(exit.sum() - 1.0) < 1e-10,
                fmt::format("|sum - 1| = {:.3e}", std::abs(exit.sum() - 1.0)));
  rep.exact_exit = state_law(cfg.q, exit, 0);
  rep.values.emplace_back("exact_mean_exit_time", mean_exit_time_exact(cfg.q, cfg.kappa, mu));
  try {
    const Eigen::VectorXd pi = resurrected_invariant_exact(cfg.q, cfg.kappa, mu);
    rep.exact_invariant = state_law(cfg.q, pi, 0);
    const Eigen::Map<const Eigen::VectorXd> k(cfg.kappa.values().data(), pi.size());
    const Eigen::VectorXd w = pi.cwiseProduct(k);
    const double diff = (w / w.sum() - exit).cwiseAbs().maxCoeff();
    rep.values.emplace_back("exact_reweight_max_diff", diff);
    rep.add_check("exact kappa-reweighted invariant equals exact exit law", diff < 1e-9,
                  fmt::format("max entry difference {:.3e}", diff));
  } catch (const SolverError& e) {
    rep.warnings.push_back(std::string("exact resurrected invariant unavailable: ") + e.what());
  }
  rep.timings.emplace_back("exact", exact_clock.seconds());

  // (b) killed trajectories
  Stopwatch kill_clock;
  const KilledChain chain(cfg.q, cfg.kappa);
  const RebirthMeasure start = RebirthMeasure::from_vector(mu);
  const ChainExitBatch batch = sample_chain_exits(chain, start, cfg.n_kills, cfg.seed, kStageExit);
  rep.empirical_exit = location_counts(cfg.q, batch.location);
  rep.timings.emplace_back("kills", kill_clock.seconds());

  const double tv_exit = tv_distance(*rep.empirical_exit, *rep.exact_exit);
  rep.values.emplace_back("tv_empirical_vs_exact_exit", tv_exit);
  rep.add_check("empirical exit law matches exact exit law", tv_exit < cfg.tv_exit_threshold,
                fmt::format("TV {:.6f} < {}", tv_exit, cfg.tv_exit_threshold));
  const auto obs = counts_of(*rep.empirical_exit);
  const auto chi = chi_square_test(obs, rep.exact_exit->mass());
  rep.values.emplace_back("chi2_statistic", chi.statistic);
  rep.values.emplace_back("chi2_p_value", chi.p_value);
  rep.add_check("chi-square goodness of fit to exact exit law", chi.p_value > cfg.alpha,
                fmt::format("stat {:.4f}, df {}, p {:.6f} > {}", chi.statistic, chi.df, chi.p_value, cfg.alpha));
  hazard_mean_check(rep, batch.hazard);

  // (c) resurrected process
  Stopwatch regen_clock;
  const RegenerationLog log = simulate_resurrected(chain, start, cfg.n_regen_cycles, cfg.seed, kStageResurrect);
  resurrected_checks(rep, cfg, log, cfg.kappa);
  rep.timings.emplace_back("resurrection", regen_clock.seconds());

  // (d) remaining pairwise comparison and the metric sanity check
  if (rep.value("tv_reweighted_vs_empirical_exit")) {
    const double a = tv_exit;
    const double b = *rep.value("tv_reweighted_vs_empirical_exit");
    const double c = tv_distance(*rep.reweighted_prediction, *rep.exact_exit);
    rep.values.emplace_back("tv_reweighted_vs_exact_exit", c);
    const bool tri = a <= b + c + 1e-12 && b <= a + c + 1e-12 && c <= a + b + 1e-12;
    rep.add_check("TV triangle inequality across the three laws", tri,
                  fmt::format("{:.6f}, {:.6f}, {:.6f}", a, b, c));
  }
  return rep;
}

Report run_qsd_scenario(const ScenarioConfig& cfg) {
  if (cfg.model != ModelKind::kCtmc) throw ConfigError("qsd scenario needs a ctmc model");
  Report rep;
  rep.scenario = cfg.name;
  rep.seed = cfg.seed;

  Stopwatch exact_clock;
  const QsdResult qsd = qsd_exact(cfg.q, cfg.kappa);
  const Eigen::Map<const Eigen::VectorXd> kappa(cfg.kappa.values().data(), qsd.pi.size());
  const Eigen::MatrixXd m = killed_generator(cfg.q, cfg.kappa).m;
  const double residual = (qsd.pi.transpose() * m + qsd.theta * qsd.pi.transpose()).cwiseAbs().maxCoeff();
  rep.values.emplace_back("theta", qsd.theta);
  rep.values.emplace_back("qsd_residual", residual);
  rep.values.emplace_back("qsd_iterations", static_cast<double>(qsd.iterations));
  rep.add_check("QSD eigen-residual < 1e-10", residual < 1e-10, fmt::format("{:.3e}", residual));
  const double kp = kappa.dot(qsd.pi);
  rep.add_check("theta = sum kappa pi within 1e-10", std::abs(kp - qsd.theta) < 1e-10,
                fmt::format("theta {:.15f}, sum kappa pi {:.15f}", qsd.theta, kp));

  const Eigen::VectorXd exit = exit_law_exact(cfg.q, cfg.kappa, qsd.pi);
  const Eigen::VectorXd prop = kappa.cwiseProduct(qsd.pi) / kp;
  const double prop_diff = (exit - prop).cwiseAbs().maxCoeff();
  rep.values.emplace_back("exit_vs_kappa_pi_max_diff", prop_diff);
  rep.add_check("exit law from QSD is proportional to kappa * pi", prop_diff < 1e-9,
                fmt::format("max entry difference {:.3e}", prop_diff));
  rep.exact_exit = state_law(cfg.q, exit, 0);

  const Eigen::VectorXd fixed = resurrected_invariant_exact(cfg.q, cfg.kappa, qsd.pi);
  const double fixed_diff = (fixed - qsd.pi).cwiseAbs().maxCoeff();
  rep.values.emplace_back("fixed_point_max_diff", fixed_diff);
  rep.add_check("Pi(pi) = pi (exact)", fixed_diff < 1e-9, fmt::format("max entry difference {:.3e}", fixed_diff));
  rep.exact_invariant = state_law(cfg.q, qsd.pi, 0);

  const double min_kappa = kappa.minCoeff();
  const std::optional<double> eps = cfg.mixture_eps ? cfg.mixture_eps
                                                    : (min_kappa > 0.0 ? std::optional<double>(min_kappa) : std::nullopt);
  if (eps) {
    if (kappa.maxCoeff() - *eps > 0.0) {
      const MixtureDecomposition mix = qsd_mixture_decomposition(cfg.q, cfg.kappa, qsd, *eps);
      rep.values.emplace_back("mixture_eps", mix.eps);
      rep.values.emplace_back("mixture_theta_shifted", mix.theta_shifted);
      rep.values.emplace_back("mixture_max_diff", mix.max_abs_diff);
      rep.add_check("two-clock mixture decomposition of the exit law", mix.max_abs_diff < 1e-9,
                    fmt::format("eps {}, theta' {:.12f}, max entry difference {:.3e}", mix.eps,
                                mix.theta_shifted, mix.max_abs_diff));
    } else {
      rep.warnings.push_back("mixture check skipped: kappa - eps vanishes identically");
    }
  }
  rep.timings.emplace_back("exact", exact_clock.seconds());

  Stopwatch kill_clock;
  const KilledChain chain(cfg.q, cfg.kappa);
  const RebirthMeasure start = RebirthMeasure::from_vector(qsd.pi);
  const ChainExitBatch batch = sample_chain_exits(chain, start, cfg.n_kills, cfg.seed, kStageExit);
  rep.empirical_exit = location_counts(cfg.q, batch.location);
  rep.timings.emplace_back("kills", kill_clock.seconds());

  const double theta = qsd.theta;
  const KsResult ks = ks_test(batch.time, [theta](double t) { return t <= 0.0 ? 0.0 : -std::expm1(-theta * t); });
  rep.values.emplace_back("ks_lifetime_statistic", ks.statistic);
  rep.values.emplace_back("ks_lifetime_p_value", ks.p_value);
  rep.add_check("kill time from QSD ~ Exp(theta) (KS)", ks.p_value > cfg.alpha,
                fmt::format("D {:.6f}, p {:.6f} > {}", ks.statistic, ks.p_value, cfg.alpha));

  std::vector<std::pair<double, double>> pairs(batch.time.size());
  for (std::size_t i = 0; i < pairs.size(); ++i)
    pairs[i] = {batch.time[i], static_cast<double>(batch.location[i])};
  try {
    const ChiSquareResult ind = independence_test(pairs, cfg.time_bins, cfg.location_bins);
    rep.values.emplace_back("independence_statistic", ind.statistic);
    rep.values.emplace_back("independence_p_value", ind.p_value);
    rep.add_check("kill time independent of kill location (chi-square)", ind.p_value > cfg.alpha,
                  fmt::format("stat {:.4f}, df {}, p {:.6f} > {}", ind.statistic, ind.df, ind.p_value, cfg.alpha));
  } catch (const StatsError& e) {
    rep.warnings.push_back(std::string("independence test not applicable: ") + e.what());
  }

  const double tv_exit = tv_distance(*rep.empirical_exit, *rep.exact_exit);
  rep.values.emplace_back("tv_empirical_vs_exact_exit", tv_exit);
  rep.add_check("empirical exit law matches exact exit law", tv_exit < cfg.tv_exit_threshold,
                fmt::format("TV {:.6f} < {}", tv_exit, cfg.tv_exit_threshold));
  hazard_mean_check(rep, batch.hazard);

  Stopwatch regen_clock;
  const RegenerationLog log = simulate_resurrected(chain, start, cfg.n_regen_cycles, cfg.seed, kStageResurrect);
  resurrected_checks(rep, cfg, log, cfg.kappa);
  const double tv_fixed = tv_distance(*rep.resurrected_invariant, *rep.exact_invariant);
  rep.values.emplace_back("tv_resurrected_vs_qsd", tv_fixed);
  rep.add_check("Pi(pi) = pi (simulated)", tv_fixed < cfg.tv_resurrected_threshold,
                fmt::format("TV {:.6f} < {}", tv_fixed, cfg.tv_resurrected_threshold));
  rep.timings.emplace_back("resurrection", regen_clock.seconds());
  return rep;
}

Report run_ray_scenario(const ScenarioConfig& cfg) {
  if (cfg.model != ModelKind::kRay) throw ConfigError("ray scenario needs model = ray");
  if (!ray_hazard_diverges(cfg.kappa)) throw KillingNotAlmostSure("total hazard along the ray is finite");
  Report rep;
  rep.scenario = cfg.name;
  rep.seed = cfg.seed;
  const double x0 = cfg.mu.position;
  const RateFunction& kappa = cfg.kappa;

  Stopwatch exact_clock;
  const double x_max = cfg.x_max ? *cfg.x_max : choose_ray_x_max(kappa, x0, cfg.bin_width);
  const RayBinning binning{cfg.bin_width, x_max};
  const std::vector<double> edges = binning.edges();
  rep.values.emplace_back("x_max", x_max);
  rep.values.emplace_back("expected_lifetime", ray_invariant_normalizer(kappa, x0));
  rep.exact_exit = EmpiricalDistribution::normalized_bins(edges, ray_exit_bins(kappa, x0, edges), 0);
  rep.exact_invariant = EmpiricalDistribution::normalized_bins(edges, ray_invariant_bins(kappa, x0, edges), 0);
  rep.timings.emplace_back("exact", exact_clock.seconds());

  Stopwatch kill_clock;
  const RayExitBatch inv =
      sample_ray_exits(kappa, x0, cfg.n_kills, RayMethod::kInversion, cfg.thinning_window, cfg.seed, kStageExit);
  const RayExitBatch thin =
      sample_ray_exits(kappa, x0, cfg.n_kills, RayMethod::kThinning, cfg.thinning_window, cfg.seed, kStageThinning);
  rep.timings.emplace_back("kills", kill_clock.seconds());
  rep.empirical_exit = EmpiricalDistribution::normalized_bins(edges, histogram(inv.location, edges), cfg.n_kills);
  rep.thinning_exit = EmpiricalDistribution::normalized_bins(edges, histogram(thin.location, edges), cfg.n_kills);
  rep.values.emplace_back("thinning_rejections_per_kill",
                          static_cast<double>(thin.rejections) / static_cast<double>(cfg.n_kills));

  const auto cdf = [&kappa, x0](double x) { return ray_exit_cdf(kappa, x0, x); };
  const KsResult ks_inv = ks_test(inv.location, cdf);
  const KsResult ks_thin = ks_test(thin.location, cdf);
  const KsResult ks_loc = ks_two_sample(inv.location, thin.location);
  const KsResult ks_time = ks_two_sample(inv.time, thin.time);
  rep.values.emplace_back("ks_inversion_p_value", ks_inv.p_value);
  rep.values.emplace_back("ks_thinning_p_value", ks_thin.p_value);
  rep.values.emplace_back("ks_two_sample_location_p_value", ks_loc.p_value);
  rep.values.emplace_back("ks_two_sample_time_p_value", ks_time.p_value);
  rep.add_check("inversion exit locations follow the closed-form exit law (KS)", ks_inv.p_value > cfg.alpha,
                fmt::format("D {:.6f}, p {:.6f}", ks_inv.statistic, ks_inv.p_value));
  rep.add_check("thinning exit locations follow the closed-form exit law (KS)", ks_thin.p_value > cfg.alpha,
                fmt::format("D {:.6f}, p {:.6f}", ks_thin.statistic, ks_thin.p_value));
  rep.add_check("inversion and thinning agree on location (two-sample KS)", ks_loc.p_value > cfg.alpha,
                fmt::format("D {:.6f}, p {:.6f}", ks_loc.statistic, ks_loc.p_value));
  rep.add_check("inversion and thinning agree on time (two-sample KS)", ks_time.p_value > cfg.alpha,
                fmt::format("D {:.6f}, p {:.6f}", ks_time.statistic, ks_time.p_value));
  hazard_mean_check(rep, thin.hazard);

  Stopwatch regen_clock;
  const RegenerationLog log = simulate_resurrected(kappa, RebirthMeasure::ray_point(x0), cfg.n_regen_cycles,
                                                   binning, cfg.seed, kStageResurrect);
  resurrected_checks(rep, cfg, log, kappa);
  const double tv_inv = tv_distance(*rep.resurrected_invariant, *rep.exact_invariant);
  rep.values.emplace_back("tv_occupation_vs_analytic_invariant", tv_inv);
  rep.add_check("resurrected occupation matches exp(-int kappa) / Z", tv_inv < cfg.tv_resurrected_threshold,
                fmt::format("TV {:.6f} < {}", tv_inv, cfg.tv_resurrected_threshold));
  const double tv_pred = tv_distance(*rep.reweighted_prediction, *rep.exact_exit);
  rep.values.emplace_back("tv_reweighted_vs_analytic_exit", tv_pred);
  rep.add_check("kappa-reweighted occupation matches closed-form exit law", tv_pred < cfg.tv_resurrected_threshold,
                fmt::format("TV {:.6f} < {}", tv_pred, cfg.tv_resurrected_threshold));
  rep.timings.emplace_back("resurrection", regen_clock.seconds());
  return rep;
}

Report run_any(const ScenarioConfig& cfg) {
  if (cfg.model == ModelKind::kRay) return run_ray_scenario(cfg);
  if (cfg.mu.kind == StartLaw::Kind::kQsd) return run_qsd_scenario(cfg);
  return run_scenario(cfg);
}

}  // namespace exitlaw
