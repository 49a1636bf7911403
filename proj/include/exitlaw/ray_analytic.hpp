#pragma once

#include <span>
#include <vector>

#include "exitlaw/process.hpp"

namespace exitlaw {

// Closed-form laws for the unit-speed ray started at x0 and reborn at x0.
// The resurrected invariant density is exp(-int_{x0}^x kappa) / Z on
// [x0, inf); the exit law has cdf 1 - exp(-int_{x0}^x kappa).

double ray_exit_cdf(const RateFunction& kappa, double x0, double x);

/// Z = integral of exp(-int_{x0}^x kappa) over [x0, inf), i.e. E[tau].
double ray_invariant_normalizer(const RateFunction& kappa, double x0);

/// Mass of the invariant law in each bin [edges[i], edges[i+1]); the last
/// edge may be +inf.
std::vector<double> ray_invariant_bins(const RateFunction& kappa, double x0, std::span<const double> edges);
std::vector<double> ray_exit_bins(const RateFunction& kappa, double x0, std::span<const double> edges);

/// Smallest multiple of `width` beyond which both the invariant law and the
/// exit law keep less than `tail` mass.
double choose_ray_x_max(const RateFunction& kappa, double x0, double width, double tail = 1e-6);

}  // namespace exitlaw
