#pragma once

// Empirical functionals of trajectory records and the residuals of the
// integral identities satisfied by the particle systems.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "uptheriver/stefan.hpp"
#include "uptheriver/trajectory.hpp"

namespace uptheriver::observables {

/// U_K(t,x) = #{entries > x} / sqrt(K). Throws ContractViolation if the
/// snapshot is not sorted ascending.
double tail_count(std::span<const double> snapshot, double K, double x);

/// V_K(t,x) = #{entries <= x} / sqrt(K) for Atlas snapshots.
double distribution_count(std::span<const double> snapshot, double K, double x);

/// Final alive count / sqrt(K). Throws AdvisoryError if the run stopped
/// before t = 1 without going extinct.
double survivors_scaled(const TrajectoryRecord& record);

/// Laggard at the recorded time nearest t (within half a step); empty after
/// extinction. Throws DomainError if t was not recorded.
std::optional<double> laggard_at(const TrajectoryRecord& record, double t);

/// r_K(t,x) = U_K(t,x) - G_K(t,x) - sum_i int_0^t phi_i(s) pN(t - s, X_i(s), x) ds.
/// The drift integral holds each logged position fixed over its step and
/// integrates the kernel's time dependence exactly. Needs a snapshot at t and
/// the drift log (CapabilityError otherwise).
double identity_residual(const TrajectoryRecord& record, double t, double x);

/// Atlas analogue: V_K(t,x) - (1/sqrt(K)) sum_i Phi(t, x - Y_i(0))
///                 + int_0^t p(t - s, x - W_K(s)) ds.
/// Needs snapshots at 0 and t and the drift log.
double atlas_identity_residual(const TrajectoryRecord& record, double t, double x);

struct Deviation {
  /// sup |U_K(t,x) - U*(t,x)| t^(3/4) over snapshots in range and x_grid.
  double tail = 0.0;
  /// sup |Z_K(t) - z(t)| over recorded series times in range.
  double laggard = 0.0;
};

/// Weighted sup-deviations of a record from the hydrodynamic limit on
/// [t_lo, t_hi]. An extinct laggard counts as an infinite deviation. Throws
/// DomainError if the record or profile does not cover the range, or if
/// x_grid is non-empty but no snapshot falls in range.
Deviation sup_deviation(const TrajectoryRecord& record, const stefan::HydroProfile& profile, double t_lo,
                        double t_hi, std::span<const double> x_grid);

/// |w|' = sup_{t <= t'} (w(t) - w(t')), zero iff w is nondecreasing.
double seminorm(std::span<const double> values);

/// Gaps between the n lowest entries of a sorted snapshot, multiplied by `scale`.
std::vector<double> lowest_gaps(std::span<const double> sorted, std::size_t n, double scale = 1.0);

/// One-sample Kolmogorov-Smirnov statistic sup |F_n - F|.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);

/// Asymptotic p-value of the KS statistic for n samples (Stephens' small-n
/// correction applied to the Kolmogorov series).
double ks_pvalue(double statistic, std::size_t n);

struct SampleStats {
  std::size_t n = 0;
  double mean = 0.0;
  double stddev = 0.0;
  double stderr_mean = 0.0;
  double min = 0.0;
  double max = 0.0;
};

/// Summary in input order (fixed summation order for reproducibility).
SampleStats describe(std::span<const double> values);

}  // namespace uptheriver::observables
