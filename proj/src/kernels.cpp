#include "uptheriver/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "uptheriver/errors.hpp"
#include "uptheriver/quadrature.hpp"

namespace uptheriver::kernels {

namespace {

constexpr double kInvSqrt2Pi = std::numbers::inv_sqrtpi / std::numbers::sqrt2;

void require_positive_time(double t, const char* who) {
  if (!(t > 0.0)) throw DomainError(std::string(who) + ": time must be positive, got " + std::to_string(t));
}

}  // namespace

double heat_kernel(double t, double x) {
  require_positive_time(t, "heat_kernel");
  return kInvSqrt2Pi / std::sqrt(t) * std::exp(-x * x / (2.0 * t));
}

double heat_kernel_dx(double t, double x) {
  require_positive_time(t, "heat_kernel_dx");
  return -(x / t) * heat_kernel(t, x);
}

double bm_cdf(double t, double x) {
  require_positive_time(t, "bm_cdf");
  return 0.5 * std::erfc(-x / std::sqrt(2.0 * t));
}

double bm_tail(double t, double x) {
  require_positive_time(t, "bm_tail");
  return 0.5 * std::erfc(x / std::sqrt(2.0 * t));
}

double neumann_kernel(double t, double y, double x) {
  require_positive_time(t, "neumann_kernel");
  return heat_kernel(t, y - x) + heat_kernel(t, y + x);
}

double absorbed_tail(double t, double y, double x) {
  if (y < 0.0 || x < 0.0) throw DomainError("absorbed_tail: positions must be non-negative");
  if (t < 0.0) throw DomainError("absorbed_tail: time must be non-negative");
  if (t == 0.0) return y > x ? 1.0 : 0.0;
  // cdf(t, y-x) - tail(t, y+x) written as a difference of two upper tails.
  const double value = bm_tail(t, x - y) - bm_tail(t, x + y);
  return std::clamp(value, 0.0, 1.0);
}

double g_term(double K, double t, double x) {
  if (!(K >= 1.0)) throw DomainError("g_term: K must be at least 1");
  require_positive_time(t, "g_term");
  const double root_k = std::sqrt(K);
  return root_k * absorbed_tail(t, 1.0 / root_k, x);
}

double heat_time_integral(double t, double x) {
  if (t < 0.0) throw DomainError("heat_time_integral: time must be non-negative");
  if (t == 0.0) return 0.0;
  const double ax = std::abs(x);
  return 2.0 * t * heat_kernel(t, x) - 2.0 * ax * bm_tail(t, ax);
}

double heat_time_moment(double t, double x) {
  if (t < 0.0) throw DomainError("heat_time_moment: time must be non-negative");
  if (t == 0.0) return 0.0;
  return (2.0 / 3.0) * t * t * heat_kernel(t, x) - (x * x / 3.0) * heat_time_integral(t, x);
}

double density_u1(double t, double x) {
  require_positive_time(t, "density_u1");
  if (x < 0.0) throw DomainError("density_u1: position must be non-negative");
  return -2.0 * heat_kernel_dx(t, x) + 4.0 * bm_tail(t, x);
}

double tail_absorption_phase(double t, double x) {
  if (!(t > 0.0) || t > 0.5) throw DomainError("tail_absorption_phase: t must lie in (0, 1/2]");
  if (x < 0.0) throw DomainError("tail_absorption_phase: position must be non-negative");
  return 2.0 * heat_kernel(t, x) + 2.0 * heat_time_integral(t, x);
}

double lambda_lhs(double t, double z) {
  require_positive_time(t, "lambda_lhs");
  const double width = 10.0 * std::sqrt(t);
  const double hi = z + width;
  if (hi <= 0.0) return 0.0;
  const double lo = std::max(0.0, z - width);
  const double u_half_0 = tail_absorption_phase(0.5, 0.0);
  auto integrand = [&](double y) {
    return heat_kernel(t, z - y) * (u_half_0 - tail_absorption_phase(0.5, y));
  };
  return quadrature::integrate(integrand, lo, hi).value;
}

namespace {

double confinement_term(int n, double t, double a, double b) {
  const double k = (2.0 * n + 1.0) * std::numbers::pi;
  return 4.0 / k * std::sin(k * a / b) * std::exp(-k * k * t / (2.0 * b * b));
}

void check_confinement_args(double t, double a, double b, int n_terms) {
  if (t < 0.0) throw DomainError("confinement_prob: time must be non-negative");
  if (!(a > 0.0) || !(a < b)) throw DomainError("confinement_prob: requires 0 < a < b");
  if (n_terms < 1) throw DomainError("confinement_prob: n_terms must be at least 1");
}

}  // namespace

double confinement_prob(double t, double a, double b, int n_terms) {
  check_confinement_args(t, a, b, n_terms);
  if (t == 0.0) return 1.0;
  double sum = 0.0;
  for (int n = 0; n < n_terms; ++n) sum += confinement_term(n, t, a, b);
  return sum;
}

double confinement_truncation_bound(double t, double a, double b, int n_terms) {
  check_confinement_args(t, a, b, n_terms);
  if (t == 0.0) return 0.0;
  const double k = (2.0 * n_terms + 1.0) * std::numbers::pi;
  return 4.0 / k * std::exp(-k * k * t / (2.0 * b * b));
}

}  // namespace uptheriver::kernels
