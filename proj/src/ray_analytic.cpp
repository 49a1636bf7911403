#include "exitlaw/ray_analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss.hpp>

#include "exitlaw/errors.hpp"

namespace exitlaw {

namespace {

constexpr double kPanel = 0.25;
constexpr double kNegligible = 1e-17;

double survival(const RateFunction& kappa, double x0, double x) {
  return x <= x0 ? 1.0 : std::exp(-ray_hazard(kappa, x0, x));
}

// Integral of the survival function over [a, b] (b may be +inf), on panels
// no wider than kPanel that never straddle a breakpoint of kappa.
double integrate_survival(const RateFunction& kappa, double x0, double a, double b) {
  a = std::max(a, x0);
  if (!(b > a)) return 0.0;
  const auto& pieces = kappa.pieces();
  const auto f = [&](double x) { return survival(kappa, x0, x); };
  double total = 0.0;
  double x = a;
  for (std::size_t panels = 0; x < b; ++panels) {
    if (panels > 50'000'000) throw SolverError("survival integral does not settle");
    double next = std::min(b, x + kPanel);
    const std::size_t k = kappa.piece_index(x);
    if (k + 1 < pieces.size()) next = std::min(next, pieces[k + 1].start);
    total += boost::math::quadrature::gauss<double, 20>::integrate(f, x, next);
    x = next;
    if (std::isinf(b) && f(x) < kNegligible * std::max(total, 1e-300)) break;
  }
  return total;
}

}  // namespace

double ray_exit_cdf(const RateFunction& kappa, double x0, double x) {
  return x <= x0 ? 0.0 : -std::expm1(-ray_hazard(kappa, x0, x));
}

double ray_invariant_normalizer(const RateFunction& kappa, double x0) {
  if (!ray_hazard_diverges(kappa)) throw KillingNotAlmostSure("total hazard along the ray is finite");
  return integrate_survival(kappa, x0, x0, std::numeric_limits<double>::infinity());
}

std::vector<double> ray_invariant_bins(const RateFunction& kappa, double x0, std::span<const double> edges) {
  const double z = ray_invariant_normalizer(kappa, x0);
  std::vector<double> mass(edges.size() - 1);
  for (std::size_t i = 0; i + 1 < edges.size(); ++i)
    mass[i] = integrate_survival(kappa, x0, edges[i], edges[i + 1]) / z;
  return mass;
}

std::vector<double> ray_exit_bins(const RateFunction& kappa, double x0, std::span<const double> edges) {
  std::vector<double> mass(edges.size() - 1);
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double hi = std::isinf(edges[i + 1]) ? 1.0 : ray_exit_cdf(kappa, x0, edges[i + 1]);
    mass[i] = std::max(0.0, hi - ray_exit_cdf(kappa, x0, edges[i]));
  }
  return mass;
}

double choose_ray_x_max(const RateFunction& kappa, double x0, double width, double tail) {
  if (!(width > 0.0)) throw DomainError("bin width must be positive");
  const double z = ray_invariant_normalizer(kappa, x0);
  double x = std::max(width, std::ceil(x0 / width) * width);
  double acc = integrate_survival(kappa, x0, x0, x);
  for (std::size_t step = 0; step < 100'000'000; ++step) {
    if ((z - acc) < tail * z && survival(kappa, x0, x) < tail) return x;
    acc += integrate_survival(kappa, x0, x, x + width);
    x += width;
  }
  throw SolverError("could not find a ray truncation point");
}

}  // namespace exitlaw
