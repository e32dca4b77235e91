#include "uptheriver/observables.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "uptheriver/errors.hpp"
#include "uptheriver/kernels.hpp"

namespace uptheriver::observables {

namespace {

void require_sorted(std::span<const double> v) {
  if (!std::is_sorted(v.begin(), v.end())) throw ContractViolation("snapshot is not sorted ascending");
}

const TailSnapshot& snapshot_or_throw(const TrajectoryRecord& record, double t) {
  const TailSnapshot* snap = record.snapshot_at(t);
  if (!snap) throw CapabilityError("no tail snapshot recorded at t = " + std::to_string(t));
  return *snap;
}

// int over the part of [t_j, t_j + h] before t of p(t - s, a) ds.
double step_heat_integral(double t, double t_j, double h, double a) {
  const double upper = t - t_j;
  if (upper <= 0.0) return 0.0;
  const double lower = std::max(0.0, upper - h);
  return kernels::heat_time_integral(upper, a) - kernels::heat_time_integral(lower, a);
}

}  // namespace

double tail_count(std::span<const double> snapshot, double K, double x) {
  require_sorted(snapshot);
  const auto above = snapshot.end() - std::upper_bound(snapshot.begin(), snapshot.end(), x);
  return static_cast<double>(above) / std::sqrt(K);
}

double distribution_count(std::span<const double> snapshot, double K, double x) {
  require_sorted(snapshot);
  const auto below = std::upper_bound(snapshot.begin(), snapshot.end(), x) - snapshot.begin();
  return static_cast<double>(below) / std::sqrt(K);
}

double survivors_scaled(const TrajectoryRecord& record) {
  if (record.extinction_time) return 0.0;
  if (record.final_time < 1.0 - 0.5 * record.meta.h) {
    throw AdvisoryError("run stopped at t = " + std::to_string(record.final_time) +
                        " before the boundary detached; survivor count not yet asymptotic");
  }
  return static_cast<double>(record.final_alive) / std::sqrt(static_cast<double>(record.meta.K));
}

std::optional<double> laggard_at(const TrajectoryRecord& record, double t) {
  const double tol = 0.5 * record.meta.h + 1e-12;
  const auto it = std::lower_bound(record.schedule.begin(), record.schedule.end(), t - tol);
  if (it == record.schedule.end() || std::abs(*it - t) > tol) {
    throw DomainError("laggard_at: t = " + std::to_string(t) + " not recorded");
  }
  return record.laggard_series[static_cast<std::size_t>(it - record.schedule.begin())];
}

double identity_residual(const TrajectoryRecord& record, double t, double x) {
  if (!record.drift_logged) throw CapabilityError("identity_residual: run was recorded without a drift log");
  if (!(t > 0.0) || x < 0.0) throw DomainError("identity_residual: need t > 0 and x >= 0");
  const TailSnapshot& snap = snapshot_or_throw(record, t);
  const double K = static_cast<double>(record.meta.K);
  const double h = record.meta.h;
  const double tt = snap.t;

  double drift = 0.0;
  for (const DriftEvent& e : record.drift_log) {
    if (e.t >= tt) break;
    drift += e.weight * (step_heat_integral(tt, e.t, h, e.position - x) +
                         step_heat_integral(tt, e.t, h, e.position + x));
  }
  return tail_count(snap.positions, K, x) - kernels::g_term(K, tt, x) - drift;
}

double atlas_identity_residual(const TrajectoryRecord& record, double t, double x) {
  if (!record.drift_logged) throw CapabilityError("atlas_identity_residual: run was recorded without a drift log");
  if (!(t > 0.0)) throw DomainError("atlas_identity_residual: need t > 0");
  const TailSnapshot& initial = snapshot_or_throw(record, record.schedule.front());
  const TailSnapshot& snap = snapshot_or_throw(record, t);
  const double K = static_cast<double>(record.meta.K);
  const double h = record.meta.h;
  const double t0 = initial.t;
  const double tt = snap.t;

  double smoothed = 0.0;
  for (double y : initial.positions) smoothed += kernels::bm_cdf(tt - t0, x - y);
  smoothed /= std::sqrt(K);

  double drift = 0.0;
  for (const DriftEvent& e : record.drift_log) {
    if (e.t >= tt) break;
    drift += e.weight * step_heat_integral(tt, e.t, h, x - e.position);
  }
  return distribution_count(snap.positions, K, x) - smoothed + drift;
}

Deviation sup_deviation(const TrajectoryRecord& record, const stefan::HydroProfile& profile, double t_lo,
                        double t_hi, std::span<const double> x_grid) {
  if (!(t_hi >= t_lo) || t_lo < 0.0) throw DomainError("sup_deviation: invalid time range");
  const double tol = 0.5 * record.meta.h + 1e-12;
  if (!record.extinction_time && record.final_time < t_hi - tol) {
    throw DomainError("sup_deviation: record ends at t = " + std::to_string(record.final_time));
  }
  if (t_hi > stefan::kPhaseChange && profile.curve().t_max() < t_hi - 1e-12) {
    throw DomainError("sup_deviation: boundary curve ends before t_hi");
  }

  Deviation dev;
  for (std::size_t i = 0; i < record.schedule.size(); ++i) {
    const double t = record.schedule[i];
    if (t < t_lo - tol || t > t_hi + tol) continue;
    const auto& z = record.laggard_series[i];
    const double d = z ? std::abs(*z - profile.boundary(std::min(t, t_hi))) : std::numeric_limits<double>::infinity();
    dev.laggard = std::max(dev.laggard, d);
  }

  if (!x_grid.empty()) {
    const double K = static_cast<double>(record.meta.K);
    bool any = false;
    for (const TailSnapshot& snap : record.tail_snapshots) {
      if (snap.t < t_lo - tol || snap.t > t_hi + tol) continue;
      any = true;
      if (snap.t <= 0.0) continue;  // weight t^(3/4) vanishes
      const double t = std::min(snap.t, t_hi);
      const double w = std::pow(t, 0.75);
      for (double x : x_grid) {
        const double d = std::abs(tail_count(snap.positions, K, x) - profile.tail(t, x)) * w;
        dev.tail = std::max(dev.tail, d);
      }
    }
    if (!any) throw DomainError("sup_deviation: no tail snapshot in the time range");
  }
  return dev;
}

double seminorm(std::span<const double> values) {
  double best = 0.0;
  double running_max = -std::numeric_limits<double>::infinity();
  for (double w : values) {
    running_max = std::max(running_max, w);
    best = std::max(best, running_max - w);
  }
  return best;
}

std::vector<double> lowest_gaps(std::span<const double> sorted, std::size_t n, double scale) {
  require_sorted(sorted);
  std::vector<double> gaps;
  for (std::size_t i = 1; i < sorted.size() && gaps.size() < n; ++i) gaps.push_back(scale * (sorted[i] - sorted[i - 1]));
  return gaps;
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw DomainError("ks_statistic: no samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_pvalue(double statistic, std::size_t n) {
  if (n == 0) throw DomainError("ks_pvalue: n must be positive");
  const double rn = std::sqrt(static_cast<double>(n));
  const double lambda = (rn + 0.12 + 0.11 / rn) * statistic;
  if (lambda <= 0.0) return 1.0;
  constexpr double pi = std::numbers::pi;
  double p;
  if (lambda < 1.18) {
    // Jacobi-transformed series converges fast for small lambda.
    double sum = 0.0;
    for (int k = 1; k <= 20; ++k) {
      const double m = 2.0 * k - 1.0;
      sum += std::exp(-m * m * pi * pi / (8.0 * lambda * lambda));
    }
    p = 1.0 - std::sqrt(2.0 * pi) / lambda * sum;
  } else {
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
      const double term = std::exp(-2.0 * k * k * lambda * lambda);
      sum += (k % 2 == 1 ? term : -term);
      if (term < 1e-16) break;
    }
    p = 2.0 * sum;
  }
  return std::clamp(p, 0.0, 1.0);
}

SampleStats describe(std::span<const double> values) {
  SampleStats s;
  s.n = values.size();
  if (s.n == 0) return s;
  double sum = 0.0;
  s.min = s.max = values.front();
  for (double v : values) {
    sum += v;
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
  }
  s.mean = sum / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(s.n - 1));
    s.stderr_mean = s.stddev / std::sqrt(static_cast<double>(s.n));
  }
  return s;
}

}  // namespace uptheriver::observables
