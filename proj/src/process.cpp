#include "exitlaw/process.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "exitlaw/errors.hpp"

namespace exitlaw {

GeneratorMatrix::GeneratorMatrix(Eigen::MatrixXd rates, std::vector<long> labels)
    : rates_(std::move(rates)), labels_(std::move(labels)) {
  if (labels_.empty()) {
    labels_.resize(static_cast<std::size_t>(rates_.rows()));
    std::iota(labels_.begin(), labels_.end(), 0L);
  }
  if (labels_.size() != static_cast<std::size_t>(rates_.rows()))
    throw DomainError("generator: label count does not match state count");
}

GeneratorMatrix GeneratorMatrix::from_rows(const std::vector<std::vector<double>>& rows,
                                           std::vector<long> labels) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(row.size()) != n) {
      std::ostringstream os;
      os << "generator: row " << i << " has " << row.size() << " entries, expected " << n;
      throw DomainError(os.str());
    }
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = row[static_cast<std::size_t>(j)];
  }
  return GeneratorMatrix(std::move(m), std::move(labels));
}

GeneratorMatrix GeneratorMatrix::reflecting_walk(long lo, long hi, double rate) {
  if (hi <= lo) throw DomainError("reflecting_walk: need lo < hi");
  const auto n = static_cast<Eigen::Index>(hi - lo + 1);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  std::vector<long> labels(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    labels[static_cast<std::size_t>(i)] = lo + static_cast<long>(i);
    if (i > 0) m(i, i - 1) = rate;
    if (i + 1 < n) m(i, i + 1) = rate;
    m(i, i) = -m.row(i).sum();
  }
  return GeneratorMatrix(std::move(m), std::move(labels));
}

std::size_t GeneratorMatrix::index_of(long label) const {
  const auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) throw DomainError("no state with label " + std::to_string(label));
  return static_cast<std::size_t>(it - labels_.begin());
}

GeneratorReport validate_generator(const GeneratorMatrix& q) {
  GeneratorReport rep;
  const auto fail = [&](std::string msg, std::optional<std::size_t> r, std::optional<std::size_t> c) {
    rep.ok = false;
    rep.message = std::move(msg);
    rep.row = r;
    rep.col = c;
    return rep;
  };
  const Eigen::MatrixXd& m = q.matrix();
  if (m.rows() != m.cols()) return fail("generator is not square", std::nullopt, std::nullopt);
  if (m.rows() < 2) return fail("generator needs at least 2 states", std::nullopt, std::nullopt);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const auto row = static_cast<std::size_t>(i);
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const auto col = static_cast<std::size_t>(j);
      if (!std::isfinite(m(i, j))) {
        std::ostringstream os;
        os << "non-finite entry q[" << i << "][" << j << "]";
        return fail(os.str(), row, col);
      }
      if (i != j && m(i, j) < 0.0) {
        std::ostringstream os;
        os << "negative off-diagonal q[" << i << "][" << j << "] = " << m(i, j);
        return fail(os.str(), row, col);
      }
    }
    const double s = m.row(i).sum();
    if (std::abs(s) > kRowSumTolerance) {
      std::ostringstream os;
      os << "row " << i << " sums to " << s;
      return fail(os.str(), row, std::nullopt);
    }
  }
  return rep;
}

void require_valid(const GeneratorMatrix& q) {
  const auto rep = validate_generator(q);
  if (!rep.ok) throw DomainError("invalid generator: " + rep.message);
}

RateFunction RateFunction::table(std::vector<double> rates) {
  for (std::size_t i = 0; i < rates.size(); ++i) {
    if (!std::isfinite(rates[i]) || rates[i] < 0.0)
      throw DomainError("kappa table entry " + std::to_string(i) + " is not a finite nonnegative rate");
  }
  RateFunction k;
  k.kind_ = Kind::kTable;
  k.values_ = std::move(rates);
  return k;
}

RateFunction RateFunction::piecewise(std::vector<RatePiece> pieces) {
  if (pieces.empty()) throw DomainError("kappa: no pieces");
  if (pieces.front().start != 0.0) throw DomainError("kappa: first piece must start at 0");
  for (std::size_t k = 0; k < pieces.size(); ++k) {
    const bool last = k + 1 == pieces.size();
    if (!last && !(pieces[k + 1].start > pieces[k].start))
      throw DomainError("kappa: breakpoints must be strictly increasing");
    for (double c : pieces[k].poly.coeffs())
      if (!std::isfinite(c)) throw DomainError("kappa: non-finite coefficient");
    const auto& p = pieces[k].poly;
    const double lo = last ? p.min_from(pieces[k].start) : p.min_on(pieces[k].start, pieces[k + 1].start);
    const double scale = std::max(1.0, last ? std::abs(p(pieces[k].start))
                                            : p.max_on(pieces[k].start, pieces[k + 1].start));
    if (lo < -1e-12 * scale)
      throw DomainError("kappa: piece " + std::to_string(k) + " takes negative values");
  }
  for (auto& piece : pieces) piece.hazard = piece.poly.antiderivative();
  RateFunction r;
  r.kind_ = Kind::kPiecewise;
  r.pieces_ = std::move(pieces);
  return r;
}

RateFunction RateFunction::minus_constant(double eps) const {
  if (!is_table()) throw DomainError("minus_constant: table kappa required");
  std::vector<double> v = values_;
  for (double& x : v) {
    x -= eps;
    if (x < 0.0 && x > -1e-12) x = 0.0;
  }
  return table(std::move(v));
}

std::size_t RateFunction::piece_index(double x) const {
  const auto it = std::upper_bound(pieces_.begin(), pieces_.end(), x,
                                   [](double v, const RatePiece& p) { return v < p.start; });
  return static_cast<std::size_t>(it - pieces_.begin()) - 1;
}

double eval_rate(const RateFunction& kappa, std::size_t state) {
  if (!kappa.is_table()) throw DomainError("eval_rate: state lookup on a ray kappa");
  if (state >= kappa.values().size())
    throw DomainError("eval_rate: state " + std::to_string(state) + " not in kappa table");
  return kappa.values()[state];
}

double eval_rate(const RateFunction& kappa, double position) {
  if (kappa.is_table()) throw DomainError("eval_rate: position lookup on a table kappa");
  if (!(position >= 0.0) || !std::isfinite(position))
    throw DomainError("eval_rate: ray position must be finite and nonnegative");
  return kappa.pieces()[kappa.piece_index(position)].poly(position);
}

double rate_bound_on(const RateFunction& kappa, double a, double b) {
  if (kappa.is_table()) throw DomainError("rate_bound_on: ray kappa required");
  if (!(a >= 0.0) || !(b > a) || !std::isfinite(b))
    throw DomainError("rate_bound_on: need 0 <= a < b < inf");
  const auto& pieces = kappa.pieces();
  double m = 0.0;
  for (std::size_t k = kappa.piece_index(a); k < pieces.size() && pieces[k].start <= b; ++k) {
    const double end = k + 1 < pieces.size() ? pieces[k + 1].start : b;
    const double lo = std::max(a, pieces[k].start);
    const double hi = std::min(b, end);
    m = std::max(m, pieces[k].poly.max_on(lo, hi));
  }
  return m;
}

double ray_hazard(const RateFunction& kappa, double a, double b) {
  if (kappa.is_table()) throw DomainError("ray_hazard: ray kappa required");
  if (!(a >= 0.0) || !(b >= a)) throw DomainError("ray_hazard: need 0 <= a <= b");
  if (b == a) return 0.0;
  const auto& pieces = kappa.pieces();
  double total = 0.0;
  for (std::size_t k = kappa.piece_index(a); k < pieces.size() && pieces[k].start < b; ++k) {
    const double end = k + 1 < pieces.size() ? pieces[k + 1].start : b;
    const double lo = std::max(a, pieces[k].start);
    const double hi = std::min(b, end);
    total += pieces[k].hazard(hi) - pieces[k].hazard(lo);
  }
  return std::max(total, 0.0);
}

bool ray_hazard_diverges(const RateFunction& kappa) {
  if (kappa.is_table()) throw DomainError("ray_hazard_diverges: ray kappa required");
  return !kappa.pieces().back().poly.is_zero();
}

RayModel::RayModel(double x0) : start(x0) {
  if (!(x0 >= 0.0) || !std::isfinite(x0)) throw DomainError("ray start must be finite and nonnegative");
}

}  // namespace exitlaw
