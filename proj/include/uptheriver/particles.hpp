#pragma once

// Discrete-time simulation in diffusively scaled coordinates: positions are
// divided by sqrt(K) and time by K, so one unit of drift moves a particle by
// sqrt(K) h per step of length h.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "uptheriver/rng.hpp"
#include "uptheriver/strategies.hpp"
#include "uptheriver/trajectory.hpp"

namespace uptheriver {

struct StepOptions {
  /// Also absorb with the Brownian-bridge crossing probability exp(-2 x y / h).
  bool bridge_correction = true;
};

/// K drifted Brownian particles absorbed at the origin.
class ParticleSystem {
 public:
  /// All K particles alive at 1/sqrt(K), t = 0. Throws DomainError for K = 0.
  static ParticleSystem init_river(std::size_t K, std::uint64_t seed, StepOptions options = {});

  std::size_t K() const { return positions_.size(); }
  double t() const { return t_; }
  std::uint64_t seed() const { return rng_.seed(); }
  std::size_t step_count() const { return step_count_; }
  const StepOptions& options() const { return options_; }

  std::span<const double> positions() const { return positions_; }
  std::span<const std::uint8_t> alive_flags() const { return alive_; }
  std::span<const std::size_t> alive_indices() const { return alive_indices_; }
  std::size_t alive_count() const { return alive_indices_.size(); }
  bool extinct() const { return alive_indices_.empty(); }
  std::optional<double> extinction_time() const { return extinction_time_; }

  /// Lowest alive position (Z_K); empty once extinct.
  std::optional<double> laggard() const;
  SystemView view() const;

  /// Advances by h using the internal generator; returns the allocation applied.
  DriftAllocation step(const Strategy& strategy, double h);
  /// Same, drawing increments from `noise`.
  DriftAllocation step(const Strategy& strategy, double h, NoiseSource& noise);

 private:
  ParticleSystem(std::size_t K, std::uint64_t seed, StepOptions options);
  DriftAllocation step_impl(const Strategy& strategy, double h, NoiseSource& noise,
                            std::vector<DriftEvent>* log);

  friend TrajectoryRecord run(ParticleSystem&, const Strategy&, double, double, const RecordSpec&);

  std::vector<double> positions_;
  std::vector<std::uint8_t> alive_;
  std::vector<std::size_t> alive_indices_;
  std::vector<double> scratch_;
  double t_ = 0.0;
  std::size_t step_count_ = 0;
  std::optional<double> extinction_time_;
  StepOptions options_;
  Rng rng_;
};

/// Steps `sys` until t_end (or extinction) and records per `spec`.
TrajectoryRecord run(ParticleSystem& sys, const Strategy& strategy, double t_end, double h,
                     const RecordSpec& spec);

/// Atlas model: unit drift on the current minimum, no absorption.
class AtlasSystem {
 public:
  AtlasSystem(std::vector<double> positions, double K, std::uint64_t seed);

  std::size_t size() const { return positions_.size(); }
  bool empty() const { return positions_.empty(); }
  double K() const { return K_; }
  double t() const { return t_; }
  std::uint64_t seed() const { return rng_.seed(); }
  std::span<const double> positions() const { return positions_; }

  /// Index of the minimum (lowest index on ties). Throws DomainError if empty.
  std::size_t laggard_index() const;
  double laggard() const { return positions_[laggard_index()]; }

  void step(double h);
  void step(double h, NoiseSource& noise);

  Rng& rng() { return rng_; }
  std::vector<double>& mutable_positions() { return positions_; }
  void advance_clock(double h) { t_ += h; }

 private:
  std::vector<double> positions_;
  double K_;
  double t_ = 0.0;
  Rng rng_;
};

/// Initial densities for Atlas models on the scaled line.
class AtlasProfile {
 public:
  enum class Kind { UBar, UUnder, Custom };

  /// u1(1/2, x) for x >= K^-gamma, else 0. gamma in (0, 1/96).
  static AtlasProfile u_bar(double gamma);
  /// u1(1/2, x) for x > 0, 2 on [-K^(-4 gamma3), 0], else 0. gamma3 in (0, 1/96).
  static AtlasProfile u_under(double gamma3);
  /// Piecewise-linear density through (xs[i], values[i]), zero outside.
  static AtlasProfile custom(std::vector<double> xs, std::vector<double> values);

  Kind kind() const { return kind_; }
  double parameter() const { return parameter_; }

  double density(double x, double K) const;
  double support_min(double K) const;
  /// Right end of the sampled support: remaining mass below 1e-6/sqrt(K).
  double support_max(double K) const;
  /// Constant dominating the density on its support.
  double bound() const;
  /// Smallest tabulated value (custom profiles), else 0.
  double min_node_value() const;
  /// Integral of the density over the line.
  double mass(double K) const;

 private:
  Kind kind_ = Kind::Custom;
  double parameter_ = 0.0;
  std::vector<double> xs_;
  std::vector<double> values_;
};

/// Poisson point process with intensity sqrt(K) * profile, by thinning against
/// the profile bound on its truncated support. Positions come back sorted.
AtlasSystem sample_atlas_initial(const AtlasProfile& profile, double K, std::uint64_t seed);

/// n particles with the lowest at 0 and i.i.d. Exp(rate) gaps in unscaled
/// units (scaled gaps are Exp(rate)/sqrt(K)).
AtlasSystem exponential_gap_initial(std::size_t n, double K, double rate, std::uint64_t seed);

/// Runs an Atlas model; drift log entries are the laggard per step.
TrajectoryRecord run_atlas(AtlasSystem& sys, double t_end, double h, const RecordSpec& spec);

struct DominanceReport {
  std::size_t steps = 0;
  /// Steps after which sorted B fell below sorted A on some shared rank.
  std::size_t sorted_violations = 0;
  std::size_t laggard_violations = 0;
  /// Per step: 1 if sorted B dominates sorted A on shared ranks.
  std::vector<std::uint8_t> sorted_dominance;

  /// Fraction of steps at which the dominance held.
  double sorted_fraction() const;
  double laggard_fraction() const;
};

/// Advances copies of both systems with rank-shared Gaussian increments:
/// the i-th smallest particle of each system receives the same increment.
/// Requires size(B) <= size(A) and sorted B >= sorted A on shared ranks.
DominanceReport coupled_run(const AtlasSystem& a, const AtlasSystem& b, double t_end, double h);

/// Default step size 0.1/K.
inline double default_step(double K) { return 0.1 / K; }

}  // namespace uptheriver
