#include "uptheriver/strategies.hpp"

#include <algorithm>
#include <mutex>
#include <string>

#include "uptheriver/errors.hpp"

namespace uptheriver {

double DriftAllocation::total() const {
  double sum = 0.0;
  for (const auto& [index, w] : entries) sum += w;
  return sum;
}

double DriftAllocation::weight(std::size_t index) const {
  double w = 0.0;
  for (const auto& [i, wi] : entries) {
    if (i == index) w += wi;
  }
  return w;
}

std::vector<double> DriftAllocation::dense(std::size_t n) const {
  std::vector<double> out(n, 0.0);
  for (const auto& [i, w] : entries) {
    if (i >= n) throw ContractViolation("DriftAllocation::dense: index out of range");
    out[i] += w;
  }
  return out;
}

void validate_allocation(const DriftAllocation& allocation, const SystemView& state) {
  double sum = 0.0;
  for (const auto& [i, w] : allocation.entries) {
    if (i >= state.positions.size()) throw ContractViolation("allocation: particle index out of range");
    if (!(w >= 0.0)) throw ContractViolation("allocation: negative or NaN weight");
    if (w > 0.0 && !state.alive[i]) {
      throw ContractViolation("allocation: absorbed particle " + std::to_string(i) + " carries drift");
    }
    sum += w;
  }
  if (sum > 1.0 + kBudgetSlack) {
    throw ContractViolation("allocation: total drift " + std::to_string(sum) + " exceeds the unit budget");
  }
}

namespace strategies {

DriftAllocation push_the_laggard(const SystemView& state) {
  DriftAllocation out;
  if (state.alive_indices.empty()) return out;
  std::size_t best = state.alive_indices.front();
  for (std::size_t i : state.alive_indices) {
    if (state.positions[i] < state.positions[best]) best = i;
  }
  out.entries.emplace_back(best, 1.0);
  return out;
}

DriftAllocation null_drift(const SystemView&) { return {}; }

DriftAllocation uniform(const SystemView& state) {
  DriftAllocation out;
  if (state.alive_indices.empty()) return out;
  const double w = 1.0 / static_cast<double>(state.alive_indices.size());
  out.entries.reserve(state.alive_indices.size());
  for (std::size_t i : state.alive_indices) out.entries.emplace_back(i, w);
  return out;
}

DriftAllocation push_the_leader(const SystemView& state) {
  DriftAllocation out;
  if (state.alive_indices.empty()) return out;
  std::size_t best = state.alive_indices.front();
  for (std::size_t i : state.alive_indices) {
    if (state.positions[i] > state.positions[best]) best = i;
  }
  out.entries.emplace_back(best, 1.0);
  return out;
}

DriftAllocation proportional_to_inverse_position(const SystemView& state) {
  DriftAllocation out;
  if (state.alive_indices.empty()) return out;
  double norm = 0.0;
  for (std::size_t i : state.alive_indices) norm += 1.0 / state.positions[i];
  out.entries.reserve(state.alive_indices.size());
  for (std::size_t i : state.alive_indices) {
    out.entries.emplace_back(i, (1.0 / state.positions[i]) / norm);
  }
  // Rounding can push the sum a few ulps past 1.
  if (const double total = out.total(); total > 1.0) {
    for (auto& entry : out.entries) entry.second /= total;
  }
  return out;
}

std::vector<Strategy> builtin_strategies() {
  return {
      {"push_the_laggard", push_the_laggard},
      {"null", null_drift},
      {"uniform", uniform},
      {"push_the_leader", push_the_leader},
      {"proportional", proportional_to_inverse_position},
  };
}

namespace {

std::mutex registry_mutex;

std::vector<Strategy>& registry() {
  static std::vector<Strategy> custom;
  return custom;
}

}  // namespace

void register_strategy(Strategy strategy) {
  if (strategy.name.empty() || !strategy.rule) throw UsageError("register_strategy: empty name or rule");
  std::lock_guard lock(registry_mutex);
  auto& custom = registry();
  auto it = std::find_if(custom.begin(), custom.end(), [&](const Strategy& s) { return s.name == strategy.name; });
  if (it != custom.end()) {
    *it = std::move(strategy);
  } else {
    custom.push_back(std::move(strategy));
  }
}

Strategy by_name(std::string_view name) {
  for (auto& s : builtin_strategies()) {
    if (s.name == name) return s;
  }
  std::lock_guard lock(registry_mutex);
  for (const auto& s : registry()) {
    if (s.name == name) return s;
  }
  throw UsageError("unknown strategy '" + std::string(name) + "'");
}

std::vector<std::string> known_names() {
  std::vector<std::string> names;
  for (const auto& s : builtin_strategies()) names.push_back(s.name);
  std::lock_guard lock(registry_mutex);
  for (const auto& s : registry()) names.push_back(s.name);
  return names;
}

}  // namespace strategies

}  // namespace uptheriver
