#include "uptheriver/trajectory.hpp"

#include <cmath>

namespace uptheriver {

const TailSnapshot* TrajectoryRecord::snapshot_at(double t) const {
  const double tol = 0.5 * meta.h + 1e-12;
  for (const auto& s : tail_snapshots) {
    if (std::abs(s.t - t) <= tol) return &s;
  }
  return nullptr;
}

}  // namespace uptheriver
