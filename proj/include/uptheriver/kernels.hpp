#pragma once

// Closed-form heat-kernel quantities for drifted Brownian particles absorbed
// at the origin. All functions are pure and thread-safe.

#include <cmath>
#include <numbers>

namespace uptheriver::kernels {

/// 4/sqrt(pi): the limiting scaled survivor count.
inline constexpr double kFourOverSqrtPi = 4.0 * std::numbers::inv_sqrtpi;
/// 2/sqrt(pi): limit of z(1/2 + u) / u^2 as u -> 0.
inline constexpr double kTwoOverSqrtPi = 2.0 * std::numbers::inv_sqrtpi;

/// Gaussian heat kernel p(t,x) = exp(-x^2/2t) / sqrt(2 pi t).
double heat_kernel(double t, double x);

/// d/dx p(t,x) = -(x/t) p(t,x).
double heat_kernel_dx(double t, double x);

/// Brownian distribution function Pr(B(t) <= x).
double bm_cdf(double t, double x);

/// Brownian tail Pr(B(t) > x), via erfc for accuracy in the far tail.
double bm_tail(double t, double x);

/// Neumann (reflected) heat kernel p(t,y-x) + p(t,y+x).
double neumann_kernel(double t, double y, double x);

/// Pr(B(t) > x, no hit of 0 before t) for a Brownian motion started at y:
/// cdf(t, y-x) - tail(t, y+x). Nondecreasing in y, nonincreasing in x, and
/// the indicator of y > x at t = 0.
double absorbed_tail(double t, double y, double x);

/// sqrt(K) * absorbed_tail(t, 1/sqrt(K), x): expected scaled tail of K
/// driftless absorbed particles started at 1/sqrt(K).
double g_term(double K, double t, double x);

/// Time integral of the heat kernel, int_0^t p(s,x) ds = 2t p(t,x) - 2|x| tail(t,|x|).
/// Returns 0 at t = 0.
double heat_time_integral(double t, double x);

/// First moment int_0^t s p(s,x) ds = (2/3) t^2 p(t,x) - (x^2/3) heat_time_integral(t,x).
double heat_time_moment(double t, double x);

/// Density of the absorption-phase profile, -2 d/dx p(t,x) + 4 tail(t,x).
double density_u1(double t, double x);

/// Hydrodynamic tail profile for 0 < t <= 1/2:
/// 2p(t,x) + int_0^t 2p(t-s,x) ds, evaluated in closed form.
double tail_absorption_phase(double t, double x);

/// Lambda(t,z) = int_0^inf p(t, z-y) (U(1/2,0) - U(1/2,y)) dy by adaptive quadrature,
/// U being the absorption-phase tail profile.
double lambda_lhs(double t, double z);

/// Probability that a Brownian motion started at a stays inside (0,b) up to
/// time t, as the partial sum of its sine-series expansion.
double confinement_prob(double t, double a, double b, int n_terms = 10);

/// Magnitude of the first omitted term of confinement_prob's series.
double confinement_truncation_bound(double t, double a, double b, int n_terms = 10);

}  // namespace uptheriver::kernels
