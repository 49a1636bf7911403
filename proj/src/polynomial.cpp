#include "exitlaw/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace exitlaw {

namespace {

// Bisection for a sign change of p on [a, b]; p(a) and p(b) differ in sign.
double bisect_root(const Polynomial& p, double a, double b) {
  double fa = p(a);
  for (int it = 0; it < 300; ++it) {
    const double m = 0.5 * (a + b);
    if (m <= a || m >= b) break;
    const double fm = p(m);
    if (fm == 0.0) return m;
    if ((fm < 0.0) == (fa < 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

Polynomial::Polynomial(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
  while (!coeffs_.empty() && coeffs_.back() == 0.0) coeffs_.pop_back();
}

double Polynomial::operator()(double x) const {
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

Polynomial Polynomial::derivative() const {
  if (coeffs_.size() <= 1) return Polynomial{};
  std::vector<double> d(coeffs_.size() - 1);
  for (std::size_t k = 1; k < coeffs_.size(); ++k) d[k - 1] = static_cast<double>(k) * coeffs_[k];
  return Polynomial(std::move(d));
}

Polynomial Polynomial::antiderivative() const {
  if (coeffs_.empty()) return Polynomial{};
  std::vector<double> a(coeffs_.size() + 1, 0.0);
  for (std::size_t k = 0; k < coeffs_.size(); ++k) a[k + 1] = coeffs_[k] / static_cast<double>(k + 1);
  return Polynomial(std::move(a));
}

double Polynomial::root_bound() const {
  if (degree() < 1) return 0.0;
  double m = 0.0;
  for (int k = 0; k < degree(); ++k) m = std::max(m, std::abs(coeffs_[k] / leading()));
  return 1.0 + m;
}

std::vector<double> Polynomial::roots_in(double a, double b) const {
  std::vector<double> roots;
  if (degree() < 1 || a > b) return roots;
  if (degree() == 1) {
    const double r = -coeffs_[0] / coeffs_[1];
    if (r >= a && r <= b) roots.push_back(r);
    return roots;
  }
  std::vector<double> knots{a};
  for (double c : derivative().roots_in(a, b))
    if (c > knots.back()) knots.push_back(c);
  if (b > knots.back()) knots.push_back(b);

  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const double lo = knots[i], hi = knots[i + 1];
    const double flo = (*this)(lo), fhi = (*this)(hi);
    double r;
    if (flo == 0.0) {
      r = lo;
    } else if (fhi == 0.0) {
      r = hi;
    } else if ((flo < 0.0) != (fhi < 0.0)) {
      r = bisect_root(*this, lo, hi);
    } else {
      continue;
    }
    if (roots.empty() || r > roots.back()) roots.push_back(r);
  }
  return roots;
}

double Polynomial::max_on(double a, double b) const {
  double m = std::max((*this)(a), (*this)(b));
  for (double c : derivative().roots_in(a, b)) m = std::max(m, (*this)(c));
  return m;
}

double Polynomial::min_on(double a, double b) const {
  double m = std::min((*this)(a), (*this)(b));
  for (double c : derivative().roots_in(a, b)) m = std::min(m, (*this)(c));
  return m;
}

double Polynomial::min_from(double a) const {
  if (degree() < 1) return (*this)(a);
  if (leading() < 0.0) return -std::numeric_limits<double>::infinity();
  // Past every critical point the polynomial increases.
  const double far = std::max(a, derivative().root_bound()) + 1.0;
  return min_on(a, far);
}

double solve_monotone(const Polynomial& p, double target, double lo, double hi, double tol) {
  const Polynomial dp = p.derivative();
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 500; ++it) {
    const double fx = p(x) - target;
    if (std::abs(fx) <= tol) return x;
    if (fx > 0.0) hi = x; else lo = x;
    if (!(hi > lo) || std::nextafter(lo, hi) >= hi) return x;
    const double slope = dp(x);
    double next = slope > 0.0 ? x - fx / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    x = next;
  }
  return x;
}

}  // namespace exitlaw
