#pragma once

// Experiment orchestration behind the `uptheriver` command-line tool.
//
// Every command reads a RunConfig, runs its replicates (replicate r uses seed
// seed_base + r) on a worker pool and writes
//   output_dir/config.json, output_dir/summary.json, output_dir/series/*.csv.
// Outputs are byte-reproducible apart from the summary's timestamp field.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "uptheriver/stefan.hpp"

namespace uptheriver::harness {

inline constexpr int kSchemaVersion = 1;

enum class Experiment { Survivors, StrategySweep, HydroCompare, StefanSolve, IdentityTest, AtlasGaps, Validate };

std::string_view to_string(Experiment e);
/// Throws UsageError for unknown names.
Experiment experiment_from_string(std::string_view name);

struct RunConfig {
  Experiment experiment = Experiment::Survivors;
  std::vector<std::size_t> K{10000};
  std::size_t replicates = 16;
  std::uint64_t seed_base = 0;
  /// Empty means "auto" (0.1/K).
  std::optional<double> h;
  double t_end = 1.5;
  std::string strategy = "push_the_laggard";
  bool bridge_correction = true;
  /// Spacing of the recorded laggard/survivor series.
  double series_interval = 0.01;

  // Stefan solver.
  double dt = 1e-3;
  double root_tol = 1e-8;
  double t_max = 2.0;

  // survivors / strategy-sweep windows.
  double window_lo = 2.10;
  double window_hi = 2.42;
  double upper_bound = 2.41;

  // hydro-compare grid and thresholds.
  double t_lo = 0.1;
  double t_step = 0.05;
  double x_max = 3.0;
  double x_step = 0.05;
  double laggard_tol = 0.1;
  double tail_tol = 0.1;
  double pass_fraction = 0.9;

  // identity-test.
  // Residual means must satisfy |mean| <= identity_tols[i] at identity_times[i].
  std::vector<double> identity_times{0.5, 0.25};
  std::vector<double> identity_tols{0.05, 0.1414213562373095};  // 0.05 * 0.25^(-3/4)
  double identity_x = 0.0;
  double atlas_gamma = 0.01;

  // atlas-gaps.
  std::size_t atlas_particles = 500;
  double gap_rate = 2.0;
  std::size_t lowest_gaps = 5;
  double ks_level = 0.01;

  std::string output_dir = "uptheriver-out";
  std::size_t jobs = 1;
  bool check = false;

  /// Step for scale K: the configured h, or 0.1/K when "auto".
  double step_for(std::size_t K) const;
};

/// Parses a config object. Unknown keys and invalid values raise UsageError.
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& cfg);
/// Reads a JSON config file; throws UsageError if unreadable.
RunConfig load_config(const std::string& path);
/// Checks ranges (replicates >= 1, K >= 1, ...). Throws UsageError.
void validate_config(const RunConfig& cfg);

struct CommandResult {
  nlohmann::json summary;
  /// Outcome of the command's acceptance checks (reported even without --check).
  bool passed = true;
};

CommandResult cmd_survivors(const RunConfig& cfg);
CommandResult cmd_strategy_sweep(const RunConfig& cfg);
CommandResult cmd_hydro_compare(const RunConfig& cfg);
CommandResult cmd_stefan_solve(const RunConfig& cfg);
CommandResult cmd_identity_test(const RunConfig& cfg);
CommandResult cmd_atlas_gaps(const RunConfig& cfg);
CommandResult cmd_validate(const RunConfig& cfg);

/// Dispatches on cfg.experiment, writes the outputs and maps the outcome to an
/// exit code: 0 pass, 1 check failure (only with cfg.check), 2 usage error,
/// 3 numerical or solver failure.
/// `passed` receives the checks' outcome when the command completes.
int execute(const RunConfig& cfg, std::string* error_message = nullptr, bool* passed = nullptr);

/// Runs task(0..n-1) on `jobs` threads and returns results in index order.
template <class T>
std::vector<T> parallel_map(std::size_t n, std::size_t jobs, const std::function<T(std::size_t)>& task);

// One named check of the validation battery.
struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
};

/// Kernel identities on their grids (max absolute error vs 1e-6).
std::vector<CheckResult> kernel_identity_checks();

/// max |U*(t, z(t)) - 4/sqrt(pi)| over grid times t >= t_from.
double conservation_error(const stefan::BoundaryCurve& curve, double t_from = 0.55);

}  // namespace uptheriver::harness

#include "uptheriver/detail/parallel.hpp"
