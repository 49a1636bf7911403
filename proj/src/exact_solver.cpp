#include "exitlaw/exact_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/LU>

#include "exitlaw/errors.hpp"

namespace exitlaw {

namespace {

constexpr double kResidualTolerance = 1e-10;

using Adjacency = std::vector<std::vector<std::size_t>>;

Adjacency adjacency(const Eigen::MatrixXd& rates, bool reversed) {
  const auto n = static_cast<std::size_t>(rates.rows());
  Adjacency adj(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && rates(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) > 0.0)
        (reversed ? adj[j] : adj[i]).push_back(reversed ? i : j);
  return adj;
}

std::vector<double> table_of(const RateFunction& kappa, std::size_t n) {
  if (!kappa.is_table() || kappa.values().size() != n)
    throw DomainError("kappa must be a table with one rate per state");
  return kappa.values();
}

void check_probability(const Eigen::VectorXd& mu, std::size_t n) {
  if (static_cast<std::size_t>(mu.size()) != n) throw DomainError("mu has the wrong dimension");
  if ((mu.array() < 0.0).any() || !mu.allFinite()) throw DomainError("mu must be nonnegative");
  if (std::abs(mu.sum() - 1.0) > kResidualTolerance) throw DomainError("mu must sum to 1");
}

// (diag(kappa) - Q), after checking every state can reach positive killing.
Eigen::MatrixXd resolvent_system(const GeneratorMatrix& q, const RateFunction& kappa) {
  return -killed_generator(q, kappa).m;
}

Eigen::VectorXd solve_checked(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const char* what) {
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  Eigen::VectorXd x = lu.solve(b);
  const double scale = std::max(b.cwiseAbs().maxCoeff(), 1e-300);
  double res = (a * x - b).cwiseAbs().maxCoeff();
  if (res >= kResidualTolerance * scale) {
    x += lu.solve(b - a * x);  // one step of iterative refinement
    res = (a * x - b).cwiseAbs().maxCoeff();
  }
  if (!x.allFinite() || res >= kResidualTolerance * scale) {
    std::ostringstream os;
    os << what << ": residual " << res << " exceeds tolerance (near-singular system)";
    throw SolverError(os.str());
  }
  return x;
}

}  // namespace

std::vector<std::vector<std::size_t>> communicating_classes(const Eigen::MatrixXd& rates) {
  const auto n = static_cast<std::size_t>(rates.rows());
  const Adjacency fwd = adjacency(rates, false), rev = adjacency(rates, true);

  // Kosaraju: finishing order on the forward graph, then sweep the reverse.
  std::vector<std::size_t> order;
  std::vector<char> seen(n, 0);
  for (std::size_t s = 0; s < n; ++s) {
    if (seen[s]) continue;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{s, 0}};
    seen[s] = 1;
    while (!stack.empty()) {
      auto& [v, next] = stack.back();
      if (next < fwd[v].size()) {
        const std::size_t w = fwd[v][next++];
        if (!seen[w]) {
          seen[w] = 1;
          stack.emplace_back(w, 0);
        }
      } else {
        order.push_back(v);
        stack.pop_back();
      }
    }
  }
  std::vector<long> comp(n, -1);
  std::vector<std::vector<std::size_t>> classes;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if (comp[*it] >= 0) continue;
    const auto id = static_cast<long>(classes.size());
    classes.emplace_back();
    std::vector<std::size_t> stack{*it};
    comp[*it] = id;
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      classes.back().push_back(v);
      for (std::size_t w : rev[v])
        if (comp[w] < 0) {
          comp[w] = id;
          stack.push_back(w);
        }
    }
  }
  for (auto& c : classes) std::sort(c.begin(), c.end());
  std::sort(classes.begin(), classes.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return classes;
}

std::vector<std::vector<std::size_t>> closed_classes(const Eigen::MatrixXd& rates) {
  const auto classes = communicating_classes(rates);
  const auto n = static_cast<std::size_t>(rates.rows());
  std::vector<std::size_t> comp(n);
  for (std::size_t c = 0; c < classes.size(); ++c)
    for (std::size_t v : classes[c]) comp[v] = c;
  std::vector<std::vector<std::size_t>> closed;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    bool leaks = false;
    for (std::size_t v : classes[c])
      for (std::size_t j = 0; j < n && !leaks; ++j)
        leaks = j != v && comp[j] != c &&
                rates(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(j)) > 0.0;
    if (!leaks) closed.push_back(classes[c]);
  }
  return closed;
}

std::string describe_classes(const std::vector<std::vector<std::size_t>>& classes,
                             const std::vector<long>& labels) {
  std::ostringstream os;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    os << (c ? " " : "") << "{";
    for (std::size_t k = 0; k < classes[c].size(); ++k)
      os << (k ? "," : "") << (labels.empty() ? static_cast<long>(classes[c][k]) : labels[classes[c][k]]);
    os << "}";
  }
  return os.str();
}

Eigen::VectorXd gth_stationary(const Eigen::MatrixXd& rates) {
  const Eigen::Index n = rates.rows();
  Eigen::MatrixXd a = rates;
  for (Eigen::Index k = n - 1; k >= 1; --k) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) s += a(k, j);
    if (!(s > 0.0)) throw SolverError("gth_stationary: rate matrix is reducible");
    for (Eigen::Index i = 0; i < k; ++i) a(i, k) /= s;
    for (Eigen::Index i = 0; i < k; ++i) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (Eigen::Index j = 0; j < k; ++j)
        if (i != j) a(i, j) += aik * a(k, j);
    }
  }
  Eigen::VectorXd x(n);
  x(0) = 1.0;
  for (Eigen::Index j = 1; j < n; ++j) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < j; ++i) s += x(i) * a(i, j);
    x(j) = s;
  }
  return x / x.sum();
}

KilledGenerator killed_generator(const GeneratorMatrix& q, const RateFunction& kappa) {
  require_valid(q);
  const std::size_t n = q.size();
  const std::vector<double> k = table_of(kappa, n);

  // States from which some positive-kappa state is reachable.
  const Adjacency rev = adjacency(q.matrix(), true);
  std::vector<char> reach(n, 0);
  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < n; ++i)
    if (k[i] > 0.0) {
      reach[i] = 1;
      stack.push_back(i);
    }
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    for (std::size_t w : rev[v])
      if (!reach[w]) {
        reach[w] = 1;
        stack.push_back(w);
      }
  }
  for (std::size_t i = 0; i < n; ++i)
    if (!reach[i])
      throw KillingNotAlmostSure("no positive killing rate reachable from state " +
                                 std::to_string(q.labels()[i]));

  KilledGenerator out{q.matrix()};
  for (std::size_t i = 0; i < n; ++i) out.m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) -= k[i];
  return out;
}

Eigen::VectorXd resolvent_solve(const GeneratorMatrix& q, const RateFunction& kappa,
                                const Eigen::VectorXd& f) {
  if (static_cast<std::size_t>(f.size()) != q.size()) throw DomainError("f has the wrong dimension");
  if (f.cwiseAbs().maxCoeff() == 0.0) return Eigen::VectorXd::Zero(f.size());
  return solve_checked(resolvent_system(q, kappa), f, "resolvent_solve");
}

Eigen::VectorXd exit_law_exact(const GeneratorMatrix& q, const RateFunction& kappa,
                               const Eigen::VectorXd& mu) {
  check_probability(mu, q.size());
  const Eigen::MatrixXd a = resolvent_system(q, kappa);
  const Eigen::VectorXd occupation = solve_checked(a.transpose(), mu, "exit_law_exact");
  const Eigen::Map<const Eigen::VectorXd> k(kappa.values().data(), static_cast<Eigen::Index>(q.size()));
  return occupation.cwiseProduct(k);
}

double mean_exit_time_exact(const GeneratorMatrix& q, const RateFunction& kappa,
                            const Eigen::VectorXd& mu) {
  check_probability(mu, q.size());
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(q.size()));
  return mu.dot(resolvent_solve(q, kappa, ones));
}

Eigen::MatrixXd resurrected_generator(const GeneratorMatrix& q, const RateFunction& kappa,
                                      const Eigen::VectorXd& mu) {
  check_probability(mu, q.size());
  Eigen::MatrixXd r = killed_generator(q, kappa).m;
  const Eigen::Map<const Eigen::VectorXd> kv(kappa.values().data(), static_cast<Eigen::Index>(q.size()));
  r += kv * mu.transpose();
  return r;
}

Eigen::VectorXd resurrected_invariant_exact(const GeneratorMatrix& q, const RateFunction& kappa,
                                            const Eigen::VectorXd& mu) {
  const Eigen::MatrixXd r = resurrected_generator(q, kappa, mu);
  const auto closed = closed_classes(r);
  if (closed.size() != 1)
    throw SolverError("resurrected generator has " + std::to_string(closed.size()) +
                      " closed classes: " + describe_classes(communicating_classes(r), q.labels()));
  const auto& cls = closed.front();
  const auto m = static_cast<Eigen::Index>(cls.size());
  Eigen::VectorXd pi = Eigen::VectorXd::Zero(r.rows());
  if (m == 1) {
    pi(static_cast<Eigen::Index>(cls[0])) = 1.0;
  } else {
    Eigen::MatrixXd sub(m, m);
    for (Eigen::Index a = 0; a < m; ++a)
      for (Eigen::Index b = 0; b < m; ++b)
        sub(a, b) = r(static_cast<Eigen::Index>(cls[static_cast<std::size_t>(a)]),
                      static_cast<Eigen::Index>(cls[static_cast<std::size_t>(b)]));
    const Eigen::VectorXd local = gth_stationary(sub);
    for (Eigen::Index a = 0; a < m; ++a) pi(static_cast<Eigen::Index>(cls[static_cast<std::size_t>(a)])) = local(a);
  }
  const double scale = std::max(1.0, r.cwiseAbs().maxCoeff());
  const double res = (pi.transpose() * r).cwiseAbs().maxCoeff();
  if (res >= kResidualTolerance * scale)
    throw SolverError("resurrected_invariant_exact: residual " + std::to_string(res));
  return pi;
}

QsdResult qsd_exact(const GeneratorMatrix& q, const RateFunction& kappa, std::size_t max_iterations) {
  const Eigen::MatrixXd m = killed_generator(q, kappa).m;
  const auto classes = communicating_classes(m);
  if (classes.size() != 1)
    throw SolverError("qsd_exact: killed generator is reducible: " + describe_classes(classes, q.labels()));

  const Eigen::Index n = m.rows();
  const double h = 0.5 / m.diagonal().cwiseAbs().maxCoeff();
  const Eigen::MatrixXd step = Eigen::MatrixXd::Identity(n, n) + h * m;

  QsdResult out;
  Eigen::RowVectorXd pi = Eigen::RowVectorXd::Constant(n, 1.0 / static_cast<double>(n));
  for (std::size_t it = 1; it <= max_iterations; ++it) {
    const Eigen::RowVectorXd next = pi * step;
    const double lambda = next.sum();
    pi = next / lambda;
    const double theta = (1.0 - lambda) / h;
    const double res = (pi * m + theta * pi).cwiseAbs().maxCoeff();
    out.iterations = it;
    out.theta = theta;
    out.residual = res;
    if (res < 1e-13) break;
  }
  if (!(out.residual < kResidualTolerance))
    throw SolverError("qsd_exact: power iteration did not converge (residual " +
                      std::to_string(out.residual) + ")");
  out.pi = pi.transpose();
  // Final theta from the converged vector rather than the last step's norm.
  out.theta = -(pi * m).sum();
  out.residual = (pi * m + out.theta * pi).cwiseAbs().maxCoeff();
  return out;
}

MixtureDecomposition qsd_mixture_decomposition(const GeneratorMatrix& q, const RateFunction& kappa,
                                               const QsdResult& qsd, double eps) {
  const std::vector<double> k = table_of(kappa, q.size());
  if (!(eps > 0.0)) throw DomainError("mixture: eps must be positive");
  if (eps > *std::min_element(k.begin(), k.end()) + 1e-15)
    throw DomainError("mixture: eps exceeds min kappa");

  MixtureDecomposition out;
  out.eps = eps;
  const RateFunction shifted = kappa.minus_constant(eps);
  const Eigen::Map<const Eigen::VectorXd> ks(shifted.values().data(), static_cast<Eigen::Index>(q.size()));
  out.theta_shifted = ks.dot(qsd.pi);
  if (!(out.theta_shifted > 0.0)) throw DomainError("mixture: kappa - eps vanishes on the QSD support");
  out.shifted_exit = exit_law_exact(q, shifted, qsd.pi);
  const double total = out.theta_shifted + eps;
  out.mixture = (out.theta_shifted / total) * out.shifted_exit + (eps / total) * qsd.pi;
  out.direct = exit_law_exact(q, kappa, qsd.pi);
  out.max_abs_diff = (out.mixture - out.direct).cwiseAbs().maxCoeff();
  return out;
}

Eigen::VectorXd point_mass(std::size_t n, std::size_t index) {
  if (index >= n) throw DomainError("point mass index out of range");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  v(static_cast<Eigen::Index>(index)) = 1.0;
  return v;
}

}  // namespace exitlaw
