#include "uptheriver/stefan.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>

#include <boost/math/tools/toms748_solve.hpp>

#include "uptheriver/errors.hpp"
#include "uptheriver/kernels.hpp"
#include "uptheriver/quadrature.hpp"

namespace uptheriver::stefan {

namespace {

constexpr double kGridSnap = 1e-12;

// Index k of the grid interval [times[k], times[k+1]) containing t.
std::size_t locate(std::span<const double> times, double t) {
  auto it = std::upper_bound(times.begin(), times.end(), t);
  return static_cast<std::size_t>(std::distance(times.begin(), it)) - 1;
}

// Sum of segment integrals of p(t - s, offset + sign z(s)) over s in [1/2, t].
// The history (times, values) must cover t; values[k] for the grid point
// reached last is taken as given.
double history_integral(std::span<const double> times, std::span<const double> values, double t,
                        double offset, double sign) {
  double sum = 0.0;
  const std::size_t n = times.size();
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const double a = times[j];
    if (a >= t - kGridSnap) break;
    double b = times[j + 1];
    double zb = values[j + 1];
    if (b > t + kGridSnap) {
      const double w = (t - a) / (b - a);
      zb = values[j] + w * (values[j + 1] - values[j]);
      b = t;
    } else {
      b = std::min(b, t);
    }
    sum += segment_integral(t, a, b, values[j], zb, offset, sign);
  }
  return sum;
}

}  // namespace

double BoundaryCurve::at(double t) const {
  if (t <= kPhaseChange || times.empty()) return 0.0;
  if (t > t_max() + kGridSnap) {
    throw DomainError("BoundaryCurve::at: t=" + std::to_string(t) + " beyond t_max=" +
                      std::to_string(t_max()));
  }
  if (t >= times.back()) return values.back();
  const std::size_t k = locate(times, t);
  const double w = (t - times[k]) / (times[k + 1] - times[k]);
  return values[k] + w * (values[k + 1] - values[k]);
}

double segment_integral(double t, double a, double b, double za, double zb, double offset,
                        double sign) {
  // With tau = t - s the argument is alpha + beta tau, and
  // p(tau, alpha + beta tau) = p(tau, alpha) exp(-alpha beta) exp(-beta^2 tau / 2).
  // The last factor is interpolated linearly; p(tau, alpha) against 1 and tau
  // is integrated exactly.
  const double slope = (zb - za) / (b - a);
  const double alpha = offset + sign * (za + slope * (t - a));
  const double beta = -sign * slope;
  const double tau_lo = std::max(0.0, t - b);
  const double tau_hi = t - a;

  // Steep segments (only seen on hand-built curves) overflow the factored
  // form; integrate directly with tau = tau_lo + v^2.
  if (0.5 * beta * beta * tau_hi > 40.0 || std::abs(alpha * beta) > 40.0) {
    const auto f = [&](double v) {
      const double tau = tau_lo + v * v;
      return tau > 0.0 ? 2.0 * v * kernels::heat_kernel(tau, alpha + beta * tau) : 0.0;
    };
    return quadrature::integrate(f, 0.0, std::sqrt(tau_hi - tau_lo), 1e-12).value;
  }

  const double i0 = kernels::heat_time_integral(tau_hi, alpha) - kernels::heat_time_integral(tau_lo, alpha);
  const double i1 = kernels::heat_time_moment(tau_hi, alpha) - kernels::heat_time_moment(tau_lo, alpha);
  const double w_lo = std::exp(-0.5 * beta * beta * tau_lo);
  const double w_hi = std::exp(-0.5 * beta * beta * tau_hi);
  const double w_slope = (w_hi - w_lo) / (tau_hi - tau_lo);
  return std::exp(-alpha * beta) * (w_lo * i0 + w_slope * (i1 - tau_lo * i0));
}

BoundaryCurve solve_boundary(double t_max, double dt, double root_tol) {
  return solve_boundary(SolverOptions{t_max, dt, root_tol, 0.0});
}

BoundaryCurve solve_boundary(const SolverOptions& opt) {
  if (!(opt.t_max > kPhaseChange)) throw DomainError("solve_boundary: t_max must exceed 1/2");
  if (!(opt.dt > 0.0)) throw DomainError("solve_boundary: dt must be positive");
  if (!(opt.root_tol > 0.0)) throw DomainError("solve_boundary: root_tol must be positive");

  const auto steps = static_cast<std::size_t>(std::ceil((opt.t_max - kPhaseChange) / opt.dt - 1e-9));
  const double dt = (opt.t_max - kPhaseChange) / static_cast<double>(steps);

  BoundaryCurve curve;
  curve.root_tol = opt.root_tol;
  curve.perturbation = opt.perturbation;
  curve.times.resize(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) curve.times[i] = kPhaseChange + static_cast<double>(i) * dt;
  curve.times.back() = opt.t_max;
  curve.values.assign(steps + 1, 0.0);

  const double reach = 10.0 * std::sqrt(dt);
  auto bits_tol = [](double lo, double hi) { return std::abs(hi - lo) <= 1e-14 * (1.0 + std::abs(hi)); };

  for (std::size_t i = 1; i <= steps; ++i) {
    const double t = curve.times[i];
    const double tau = t - kPhaseChange;
    const std::span<const double> times(curve.times.data(), i + 1);
    auto residual = [&](double z) {
      curve.values[i] = z;
      const std::span<const double> values(curve.values.data(), i + 1);
      return kernels::lambda_lhs(tau, z) - opt.perturbation - history_integral(times, values, t, z, -1.0);
    };

    const double z_prev = curve.values[i - 1];
    const double r_prev = residual(z_prev);
    double z = z_prev;
    double r = r_prev;

    if (r_prev > 0.0) {
      // Root lies below the previous value; measure the decrease, then clamp.
      const double lo = z_prev - reach;
      const double r_lo = residual(lo);
      if (r_lo > 0.0) throw SolverFailure("solve_boundary: root not bracketed below z_prev", t);
      std::uintmax_t iters = 200;
      const auto [a, b] = boost::math::tools::toms748_solve(residual, lo, z_prev, r_lo, r_prev, bits_tol, iters);
      const double decrease = z_prev - 0.5 * (a + b);
      ++curve.clamped_steps;
      curve.max_clamped_decrease = std::max(curve.max_clamped_decrease, decrease);
      if (decrease > opt.root_tol) curve.monotonicity_flagged = true;
    } else if (r_prev < 0.0) {
      // Small trial bracket first: near t = 1/2 from z ~ (2/sqrt(pi)) tau^2,
      // later from the previous increment.
      double guess = 0.0;
      if (i < 3) {
        guess = 3.0 * kernels::kTwoOverSqrtPi * tau * tau;
      } else {
        guess = z_prev + 3.0 * (z_prev - curve.values[i - 2]);
      }
      guess = std::clamp(guess, z_prev + 1e-12, z_prev + reach);
      double lo = z_prev;
      double r_lo = r_prev;
      double hi = guess;
      double r_hi = residual(hi);
      if (r_hi < 0.0) {
        lo = hi;
        r_lo = r_hi;
        hi = z_prev + reach;
        r_hi = residual(hi);
        if (r_hi < 0.0) {
          throw SolverFailure("solve_boundary: root not bracketed within [z_prev, z_prev + 10 sqrt(dt)]", t);
        }
      }
      if (r_hi == 0.0) {
        z = hi;
      } else {
        std::uintmax_t iters = 200;
        const auto [a, b] = boost::math::tools::toms748_solve(residual, lo, hi, r_lo, r_hi, bits_tol, iters);
        z = 0.5 * (a + b);
      }
      r = residual(z);
    }

    curve.values[i] = z;
    curve.residual_tol = std::max(curve.residual_tol, std::abs(r));
  }
  return curve;
}

double memory_integral(const BoundaryCurve& curve, double t) {
  if (t < kPhaseChange || t > curve.t_max() + kGridSnap) {
    throw DomainError("memory_integral: t outside the curve's grid");
  }
  return history_integral(curve.times, curve.values, t, curve.at(t), -1.0);
}

double boundary_residual(const BoundaryCurve& curve, double t, double perturbation) {
  if (!(t > kPhaseChange) || t > curve.t_max() + kGridSnap) {
    throw DomainError("boundary_residual: t must lie in (1/2, t_max]");
  }
  return kernels::lambda_lhs(t - kPhaseChange, curve.at(t)) - perturbation - memory_integral(curve, t);
}

double eval_tail_moving(const BoundaryCurve& curve, double t, double x) {
  if (t < kPhaseChange) throw DomainError("eval_tail_moving: t must be at least 1/2");
  const double z_t = curve.at(t);
  if (x < z_t - kGridSnap) {
    throw DomainError("eval_tail_moving: x=" + std::to_string(x) + " left of the boundary z(t)=" +
                      std::to_string(z_t));
  }
  // Absorption phase, z = 0 on [0, 1/2]: closed form.
  double u = 2.0 * kernels::heat_kernel(t, x) +
             2.0 * (kernels::heat_time_integral(t, x) - kernels::heat_time_integral(t - kPhaseChange, x));
  u += history_integral(curve.times, curve.values, t, x, -1.0);
  u += history_integral(curve.times, curve.values, t, x, +1.0);
  return u;
}

double stability_probe(const BoundaryCurve& curve, double f_sup) {
  if (f_sup < 0.0) throw DomainError("stability_probe: f_sup must be non-negative");
  if (f_sup == 0.0 || curve.size() < 2) return 0.0;
  const double dt = (curve.t_max() - kPhaseChange) / static_cast<double>(curve.size() - 1);
  const BoundaryCurve perturbed =
      solve_boundary(SolverOptions{curve.t_max(), dt, curve.root_tol > 0 ? curve.root_tol : 1e-8, f_sup});
  double sup = 0.0;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    sup = std::max(sup, std::abs(perturbed.values[i] - curve.values[i]));
  }
  return sup;
}

HydroProfile::HydroProfile(BoundaryCurve curve) : curve_(std::move(curve)) {}

double HydroProfile::tail(double t, double x) const {
  if (!(t > 0.0)) throw DomainError("HydroProfile::tail: t must be positive");
  if (t <= kPhaseChange) return kernels::tail_absorption_phase(t, std::max(x, 0.0));
  return eval_tail_moving(curve_, t, std::max(x, curve_.at(t)));
}

}  // namespace uptheriver::stefan
