#include "uptheriver/serialize.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "uptheriver/errors.hpp"

namespace uptheriver::serialize {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string curve_to_csv(const stefan::BoundaryCurve& curve) {
  std::string out = "t,z\n";
  for (std::size_t i = 0; i < curve.size(); ++i) {
    out += format_double(curve.times[i]) + "," + format_double(curve.values[i]) + "\n";
  }
  return out;
}

nlohmann::json curve_to_json(const stefan::BoundaryCurve& curve) {
  return {
      {"t", curve.times},
      {"z", curve.values},
      {"residual_tol", curve.residual_tol},
      {"root_tol", curve.root_tol},
      {"perturbation", curve.perturbation},
      {"clamped_steps", curve.clamped_steps},
      {"max_clamped_decrease", curve.max_clamped_decrease},
      {"monotonicity_flagged", curve.monotonicity_flagged},
  };
}

stefan::BoundaryCurve curve_from_json(const nlohmann::json& j) {
  stefan::BoundaryCurve c;
  try {
    c.times = j.at("t").get<std::vector<double>>();
    c.values = j.at("z").get<std::vector<double>>();
    c.residual_tol = j.value("residual_tol", 0.0);
    c.root_tol = j.value("root_tol", 0.0);
    c.perturbation = j.value("perturbation", 0.0);
    c.clamped_steps = j.value("clamped_steps", std::size_t{0});
    c.max_clamped_decrease = j.value("max_clamped_decrease", 0.0);
    c.monotonicity_flagged = j.value("monotonicity_flagged", false);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("boundary curve JSON: ") + e.what());
  }
  if (c.times.size() != c.values.size() || c.times.empty()) throw UsageError("boundary curve JSON: bad lengths");
  return c;
}

stefan::BoundaryCurve curve_from_csv(std::string_view text) {
  stefan::BoundaryCurve c;
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != "t,z") throw UsageError("boundary curve CSV: expected header t,z");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw UsageError("boundary curve CSV: malformed row '" + line + "'");
    double t = 0.0, z = 0.0;
    const auto r1 = std::from_chars(line.data(), line.data() + comma, t);
    const auto r2 = std::from_chars(line.data() + comma + 1, line.data() + line.size(), z);
    if (r1.ec != std::errc() || r2.ec != std::errc()) throw UsageError("boundary curve CSV: bad number in '" + line + "'");
    c.times.push_back(t);
    c.values.push_back(z);
  }
  if (c.times.empty()) throw UsageError("boundary curve CSV: no rows");
  return c;
}

nlohmann::json record_to_json(const TrajectoryRecord& r) {
  nlohmann::json j = {
      {"meta",
       {{"model", r.meta.model},
        {"K", r.meta.K},
        {"seed", r.meta.seed},
        {"strategy", r.meta.strategy},
        {"h", r.meta.h},
        {"t_end", r.meta.t_end},
        {"bridge_correction", r.meta.bridge_correction}}},
      {"schedule", r.schedule},
      {"final_time", r.final_time},
      {"final_alive", r.final_alive},
      {"drift_logged", r.drift_logged},
      {"drift_events", r.drift_log.size()},
  };
  j["extinction_time"] = r.extinction_time ? nlohmann::json(*r.extinction_time) : nlohmann::json(nullptr);
  nlohmann::json snaps = nlohmann::json::array();
  for (const auto& s : r.tail_snapshots) snaps.push_back({{"t", s.t}, {"count", s.positions.size()}});
  j["snapshots"] = snaps;
  return j;
}

std::string series_to_csv(const TrajectoryRecord& r) {
  std::string out = "t,Z_K,alive_count\n";
  for (std::size_t i = 0; i < r.schedule.size(); ++i) {
    out += format_double(r.schedule[i]) + ",";
    if (r.laggard_series[i]) out += format_double(*r.laggard_series[i]);
    out += "," + std::to_string(r.alive_series[i]) + "\n";
  }
  return out;
}

std::string snapshots_to_csv(const TrajectoryRecord& r) {
  std::string out = "t,x,U_K\n";
  const double scale = 1.0 / std::sqrt(static_cast<double>(r.meta.K));
  for (const auto& s : r.tail_snapshots) {
    const std::size_t n = s.positions.size();
    for (std::size_t i = 0; i < n; ++i) {
      // Entries strictly above positions[i]; equal neighbours share a count.
      std::size_t j = i + 1;
      while (j < n && s.positions[j] == s.positions[i]) ++j;
      out += format_double(s.t) + "," + format_double(s.positions[i]) + "," +
             format_double(static_cast<double>(n - j) * scale) + "\n";
    }
  }
  return out;
}

}  // namespace uptheriver::serialize
