#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "exitlaw/process.hpp"

namespace exitlaw {

/// Sub-Markovian generator M = Q - diag(kappa); row i sums to -kappa_i.
struct KilledGenerator {
  Eigen::MatrixXd m;
};

/// Quasi-stationary distribution pi with pi^T M = -theta pi^T.
struct QsdResult {
  Eigen::VectorXd pi;
  double theta = 0.0;
  double residual = 0.0;  // max |pi^T M + theta pi^T|
  std::size_t iterations = 0;
};

/// Strongly connected components of the directed graph with an edge i -> j
/// whenever rates(i, j) > 0, i != j. Components are listed in order of
/// their smallest state index.
std::vector<std::vector<std::size_t>> communicating_classes(const Eigen::MatrixXd& rates);

/// Classes with no edge leaving them.
std::vector<std::vector<std::size_t>> closed_classes(const Eigen::MatrixXd& rates);

std::string describe_classes(const std::vector<std::vector<std::size_t>>& classes,
                             const std::vector<long>& labels);

/// Stationary distribution of an irreducible rate matrix by the
/// Grassmann-Taksar-Heyman state reduction. Only off-diagonal entries are
/// read and no subtractions occur, so tiny tail probabilities keep full
/// relative accuracy.
Eigen::VectorXd gth_stationary(const Eigen::MatrixXd& rates);

KilledGenerator killed_generator(const GeneratorMatrix& q, const RateFunction& kappa);

/// g with (diag(kappa) - Q) g = f, i.e. g = R f for the resolvent at 0.
Eigen::VectorXd resolvent_solve(const GeneratorMatrix& q, const RateFunction& kappa,
                                const Eigen::VectorXd& f);

/// Law of the pre-kill location started from mu: mu^T (diag(kappa) - Q)^{-1} diag(kappa).
/// Not renormalized; its total mass is 1 up to rounding.
Eigen::VectorXd exit_law_exact(const GeneratorMatrix& q, const RateFunction& kappa,
                               const Eigen::VectorXd& mu);

/// E_mu[tau] = mu^T R 1.
double mean_exit_time_exact(const GeneratorMatrix& q, const RateFunction& kappa,
                            const Eigen::VectorXd& mu);

/// Generator of the process reborn from mu at every kill: Q - diag(kappa) + kappa mu^T.
Eigen::MatrixXd resurrected_generator(const GeneratorMatrix& q, const RateFunction& kappa,
                                      const Eigen::VectorXd& mu);

/// Invariant distribution of the mu-resurrected chain. Supported on the
/// unique closed class of the resurrected generator; throws SolverError
/// with the class decomposition when there is more than one.
Eigen::VectorXd resurrected_invariant_exact(const GeneratorMatrix& q, const RateFunction& kappa,
                                            const Eigen::VectorXd& mu);

/// Perron eigenpair of M by power iteration on I + hM, h = 0.5 / max |M_ii|.
QsdResult qsd_exact(const GeneratorMatrix& q, const RateFunction& kappa,
                    std::size_t max_iterations = 100'000);

/// Exit law from the QSD written as two competing exponential clocks: with
/// probability theta'/(theta'+eps) the kill comes from kappa - eps, otherwise
/// from the constant rate eps (whose exit law is pi itself).
struct MixtureDecomposition {
  double eps = 0.0;
  double theta_shifted = 0.0;  // theta' = sum (kappa - eps) pi
  Eigen::VectorXd shifted_exit;  // exit_law_exact(Q, kappa - eps, pi)
  Eigen::VectorXd mixture;
  Eigen::VectorXd direct;  // exit_law_exact(Q, kappa, pi)
  double max_abs_diff = 0.0;
};

MixtureDecomposition qsd_mixture_decomposition(const GeneratorMatrix& q, const RateFunction& kappa,
                                               const QsdResult& qsd, double eps);

/// Point mass on a state index, as a dense vector.
Eigen::VectorXd point_mass(std::size_t n, std::size_t index);

}  // namespace exitlaw
