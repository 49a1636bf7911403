#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "exitlaw/polynomial.hpp"

namespace exitlaw {

inline constexpr double kRowSumTolerance = 1e-12;

/// Conservative Q-matrix of a finite continuous-time Markov chain.
///
/// Construction does not enforce the generator invariants; call
/// validate_generator() (or require_valid()) before using a matrix as the
/// unkilled dynamics. Each state carries an integer label, e.g. its position
/// on Z when the chain is a truncated walk.
class GeneratorMatrix {
 public:
  GeneratorMatrix() = default;
  explicit GeneratorMatrix(Eigen::MatrixXd rates, std::vector<long> labels = {});
  static GeneratorMatrix from_rows(const std::vector<std::vector<double>>& rows,
                                   std::vector<long> labels = {});

  /// Nearest-neighbour walk on {lo, ..., hi} jumping at `rate` to each side.
  /// Boundary states only jump inward (reflecting truncation of Z).
  static GeneratorMatrix reflecting_walk(long lo, long hi, double rate = 1.0);

  std::size_t size() const { return static_cast<std::size_t>(rates_.rows()); }
  double operator()(std::size_t i, std::size_t j) const {
    return rates_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  const Eigen::MatrixXd& matrix() const { return rates_; }
  const std::vector<long>& labels() const { return labels_; }

  /// Index of the state carrying `label`; throws DomainError if absent.
  std::size_t index_of(long label) const;
  /// Total jump rate out of state i, i.e. -q[i][i].
  double exit_rate(std::size_t i) const { return -(*this)(i, i); }

 private:
  Eigen::MatrixXd rates_;
  std::vector<long> labels_;
};

struct GeneratorReport {
  bool ok = true;
  std::string message;
  std::optional<std::size_t> row;
  std::optional<std::size_t> col;
};

GeneratorReport validate_generator(const GeneratorMatrix& q);
// Throws DomainError carrying the validation message.
void require_valid(const GeneratorMatrix& q);

/// One polynomial piece of a ray killing rate, valid from `start` up to the
/// next piece's start (the last piece extends to infinity).
struct RatePiece {
  double start = 0.0;
  Polynomial poly;
  Polynomial hazard;  // antiderivative of poly, filled by RateFunction::piecewise
};

/// Killing rate kappa: either a per-state table (indexed by state index) or a
/// piecewise polynomial on [0, inf).
class RateFunction {
 public:
  enum class Kind { kTable, kPiecewise };

  static RateFunction table(std::vector<double> rates);
  static RateFunction piecewise(std::vector<RatePiece> pieces);
  static RateFunction polynomial(std::vector<double> coeffs) {
    return piecewise({RatePiece{0.0, Polynomial(std::move(coeffs)), {}}});
  }

  Kind kind() const { return kind_; }
  bool is_table() const { return kind_ == Kind::kTable; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<RatePiece>& pieces() const { return pieces_; }

  /// kappa - eps (table kind). Entries must stay nonnegative.
  RateFunction minus_constant(double eps) const;

  std::size_t piece_index(double x) const;

 private:
  Kind kind_ = Kind::kTable;
  std::vector<double> values_;
  std::vector<RatePiece> pieces_;
};

double eval_rate(const RateFunction& kappa, std::size_t state);
double eval_rate(const RateFunction& kappa, double position);

/// Exact maximum of a piecewise-polynomial kappa over [a, b] (left limits at
/// interior breakpoints included, so the value bounds the supremum).
double rate_bound_on(const RateFunction& kappa, double a, double b);

/// Integral of a piecewise-polynomial kappa over [a, b], a <= b.
double ray_hazard(const RateFunction& kappa, double a, double b);

/// True when the integral of kappa over [x0, inf) diverges.
bool ray_hazard_diverges(const RateFunction& kappa);

/// Particle on [0, inf) moving with velocity +1.
struct RayModel {
  double start = 0.0;

  explicit RayModel(double x0 = 0.0);
  double position(double t) const { return start + t; }
};

}  // namespace exitlaw
