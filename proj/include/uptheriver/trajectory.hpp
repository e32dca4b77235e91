#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace uptheriver {

/// Which times a run records.
struct RecordSpec {
  /// Spacing of the laggard / survivor series in scaled time; 0 records every step.
  double series_interval = 0.0;
  /// Times at which full sorted position snapshots are kept.
  std::vector<double> snapshot_times;
  /// Keep the per-step drift log needed by the integral-identity residuals.
  bool log_drift = false;
};

/// Drift applied during one step [t, t + h): particle `index` at `position`
/// received `weight` of the unit budget.
struct DriftEvent {
  double t = 0.0;
  double position = 0.0;
  double weight = 0.0;
  std::size_t index = 0;
};

struct TailSnapshot {
  double t = 0.0;
  /// Alive positions, ascending (all positions for Atlas runs).
  std::vector<double> positions;
};

struct TrajectoryMeta {
  std::string model;  // "river" or "atlas"
  std::size_t K = 0;
  std::uint64_t seed = 0;
  std::string strategy;
  double h = 0.0;
  double t_end = 0.0;
  bool bridge_correction = true;
};

/// Immutable result of one run.
struct TrajectoryRecord {
  TrajectoryMeta meta;
  std::vector<double> schedule;
  /// Laggard Z_K (W_K for Atlas runs); empty after extinction.
  std::vector<std::optional<double>> laggard_series;
  std::vector<std::size_t> alive_series;
  std::vector<TailSnapshot> tail_snapshots;
  std::vector<DriftEvent> drift_log;
  bool drift_logged = false;
  std::optional<double> extinction_time;
  /// Time the run actually reached (t_end, or the extinction time).
  double final_time = 0.0;
  std::size_t final_alive = 0;

  /// Snapshot recorded at time t (within half a step), or nullptr.
  const TailSnapshot* snapshot_at(double t) const;
};

}  // namespace uptheriver
