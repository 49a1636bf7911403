#pragma once

#include <vector>

namespace exitlaw {

// Real polynomial in monomial form, coeffs[k] multiplies x^k.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> coeffs);

  double operator()(double x) const;
  const std::vector<double>& coeffs() const { return coeffs_; }
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  bool is_zero() const { return coeffs_.empty(); }
  double leading() const { return coeffs_.empty() ? 0.0 : coeffs_.back(); }

  Polynomial derivative() const;
  // Antiderivative vanishing at x = 0.
  Polynomial antiderivative() const;

  // Real roots in [a, b], sorted. Roots are isolated through the critical
  // points of the derivative, so each monotone segment holds at most one.
  std::vector<double> roots_in(double a, double b) const;

  // Exact extrema on a bounded interval via endpoints and critical points.
  double max_on(double a, double b) const;
  double min_on(double a, double b) const;

  // Infimum over [a, inf); -inf when the polynomial is unbounded below.
  double min_from(double a) const;

  // Radius containing every real root (Cauchy bound).
  double root_bound() const;

 private:
  std::vector<double> coeffs_;  // trailing zeros trimmed
};

// Solve p(x) = target for x in [lo, hi] where p is nondecreasing on the
// interval and p(lo) <= target <= p(hi). Newton steps safeguarded by
// bisection; stops when |p(x) - target| <= tol or the bracket collapses.
double solve_monotone(const Polynomial& p, double target, double lo, double hi, double tol);

}  // namespace exitlaw
