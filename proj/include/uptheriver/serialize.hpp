#pragma once

// CSV / JSON encodings of boundary curves and trajectory records.

#include <string>
#include <string_view>

#include "json.hpp"
#include "uptheriver/stefan.hpp"
#include "uptheriver/trajectory.hpp"

namespace uptheriver::serialize {

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

/// Header "t,z" then one row per grid point.
std::string curve_to_csv(const stefan::BoundaryCurve& curve);
nlohmann::json curve_to_json(const stefan::BoundaryCurve& curve);
stefan::BoundaryCurve curve_from_json(const nlohmann::json& j);
/// Parses curve_to_csv output (diagnostic fields are left at zero).
stefan::BoundaryCurve curve_from_csv(std::string_view text);

/// Metadata, schedule and summary scalars (bulk series go to CSV).
nlohmann::json record_to_json(const TrajectoryRecord& record);
/// Columns t, Z_K, alive_count; Z_K is empty after extinction.
std::string series_to_csv(const TrajectoryRecord& record);
/// Columns t, x, U_K: one row per particle of every snapshot, U_K taken at
/// the particle's position.
std::string snapshots_to_csv(const TrajectoryRecord& record);

}  // namespace uptheriver::serialize
