#pragma once

// Moving-boundary phase of the hydrodynamic limit: the free boundary z(t) for
// t >= 1/2, solved from its causal integral equation
//
//   Lambda(t - 1/2, z(t)) = int_{1/2}^t p(t - s, z(t) - z(s)) ds,   z(1/2) = 0,
//
// and the tail profile U*(t,x) built from it.

#include <cstddef>
#include <span>
#include <vector>

namespace uptheriver::stefan {

inline constexpr double kPhaseChange = 0.5;

/// Free boundary sampled on a uniform grid starting at t = 1/2, linearly
/// interpolated in between. Values are nondecreasing with values[0] == 0.
struct BoundaryCurve {
  std::vector<double> times;
  std::vector<double> values;
  /// Largest |residual| over the solved grid points.
  double residual_tol = 0.0;
  /// Root tolerance the curve was solved with.
  double root_tol = 0.0;
  /// Constant right-hand-side offset the curve was solved with (0 for z itself).
  double perturbation = 0.0;
  /// Steps where the root fell below the previous value and was clamped.
  std::size_t clamped_steps = 0;
  double max_clamped_decrease = 0.0;
  /// True if any clamped decrease exceeded root_tol.
  bool monotonicity_flagged = false;

  double t_max() const { return times.empty() ? kPhaseChange : times.back(); }
  std::size_t size() const { return times.size(); }

  /// z(t); zero for t <= 1/2. Throws DomainError past t_max.
  double at(double t) const;
};

struct SolverOptions {
  double t_max = 2.0;
  double dt = 1e-3;
  double root_tol = 1e-8;
  /// Constant f added to the right-hand side (stability experiments).
  double perturbation = 0.0;
};

/// Time-marching solve with pinned history. Throws SolverFailure when the root
/// cannot be bracketed within [z_prev, z_prev + 10 sqrt(dt)].
BoundaryCurve solve_boundary(const SolverOptions& options);
BoundaryCurve solve_boundary(double t_max, double dt = 1e-3, double root_tol = 1e-8);

/// int_{1/2}^t p(t - s, z(t) - z(s)) ds with z piecewise linear on the curve.
double memory_integral(const BoundaryCurve& curve, double t);

/// Lambda(t - 1/2, z(t)) - perturbation - memory_integral(curve, t).
double boundary_residual(const BoundaryCurve& curve, double t, double perturbation = 0.0);

/// U*(t,x) = 2p(t,x) + int_0^t pN(t - s, z(s), x) ds for t >= 1/2, x >= z(t).
double eval_tail_moving(const BoundaryCurve& curve, double t, double x);

/// Re-solves on the same grid with the right-hand side offset by f_sup and
/// returns sup_t |z_perturbed(t) - z(t)|.
double stability_probe(const BoundaryCurve& curve, double f_sup);

/// Integral over s in [a,b] of p(t - s, offset + sign * z(s)) with z linear
/// from za to zb. Exact in the kernel's time dependence (including the
/// 1/sqrt(t - s) endpoint singularity); second order in the slope factor.
double segment_integral(double t, double a, double b, double za, double zb, double offset,
                        double sign);

/// Hydrodynamic limit U*(t,x) over both phases.
class HydroProfile {
 public:
  explicit HydroProfile(BoundaryCurve curve);

  const BoundaryCurve& curve() const { return curve_; }
  double boundary(double t) const { return curve_.at(t); }

  /// U*(t,x) for t > 0. Left of the support (x < z(t)) the tail is flat and
  /// equals U*(t, z(t)).
  double tail(double t, double x) const;

 private:
  BoundaryCurve curve_;
};

}  // namespace uptheriver::stefan
