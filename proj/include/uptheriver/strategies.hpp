#pragma once

// Drift-allocation strategies: pure rules mapping the current particle state
// to non-negative weights with total at most one.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace uptheriver {

/// Read-only view of an absorbed particle system handed to strategies.
struct SystemView {
  std::span<const double> positions;
  std::span<const std::uint8_t> alive;
  /// Indices of alive particles in ascending order.
  std::span<const std::size_t> alive_indices;
  double t = 0.0;
};

/// Sparse drift weights: (particle index, weight) pairs. Missing indices carry 0.
struct DriftAllocation {
  std::vector<std::pair<std::size_t, double>> entries;

  double total() const;
  double weight(std::size_t index) const;
  std::vector<double> dense(std::size_t n) const;
};

inline constexpr double kBudgetSlack = 1e-12;

/// Throws ContractViolation unless weights are non-negative, sum to at most
/// 1 + kBudgetSlack and touch only alive particles.
void validate_allocation(const DriftAllocation& allocation, const SystemView& state);

struct Strategy {
  std::string name;
  std::function<DriftAllocation(const SystemView&)> rule;

  DriftAllocation operator()(const SystemView& state) const { return rule(state); }
};

namespace strategies {

/// Whole unit drift on the lowest alive particle; lowest index wins ties.
DriftAllocation push_the_laggard(const SystemView& state);
DriftAllocation null_drift(const SystemView& state);
/// 1/alive_count on every alive particle.
DriftAllocation uniform(const SystemView& state);
/// Whole unit drift on the highest alive particle; lowest index wins ties.
DriftAllocation push_the_leader(const SystemView& state);
/// Weights proportional to 1/x_i, normalised to total 1.
DriftAllocation proportional_to_inverse_position(const SystemView& state);

/// push_the_laggard, null, uniform, push_the_leader, proportional.
std::vector<Strategy> builtin_strategies();

/// Adds a custom strategy to the process-wide registry consulted by by_name.
void register_strategy(Strategy strategy);

/// Looks up a builtin or registered strategy. Throws UsageError if unknown.
Strategy by_name(std::string_view name);

std::vector<std::string> known_names();

}  // namespace strategies

}  // namespace uptheriver
