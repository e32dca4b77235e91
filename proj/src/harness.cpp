#include "uptheriver/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "uptheriver/errors.hpp"
#include "uptheriver/kernels.hpp"
#include "uptheriver/observables.hpp"
#include "uptheriver/particles.hpp"
#include "uptheriver/quadrature.hpp"
#include "uptheriver/serialize.hpp"
#include "uptheriver/stefan.hpp"
#include "uptheriver/strategies.hpp"

namespace uptheriver::harness {

using nlohmann::json;
using serialize::format_double;

namespace {

constexpr std::pair<Experiment, std::string_view> kExperimentNames[] = {
    {Experiment::Survivors, "survivors"},
    {Experiment::StrategySweep, "strategy-sweep"},
    {Experiment::HydroCompare, "hydro-compare"},
    {Experiment::StefanSolve, "stefan-solve"},
    {Experiment::IdentityTest, "identity-test"},
    {Experiment::AtlasGaps, "atlas-gaps"},
    {Experiment::Validate, "validate"},
};

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

// Evenly spaced points lo, lo + step, ..., up to hi (inclusive within 1e-9).
std::vector<double> grid(double lo, double hi, double step) {
  std::vector<double> g;
  const auto n = static_cast<long long>(std::floor((hi - lo) / step + 1e-9));
  for (long long i = 0; i <= n; ++i) g.push_back(lo + static_cast<double>(i) * step);
  return g;
}

json stats_json(const observables::SampleStats& s) {
  return {{"n", s.n}, {"mean", s.mean}, {"stderr", s.stderr_mean}, {"stddev", s.stddev}, {"min", s.min}, {"max", s.max}};
}

template <class T>
void read(const json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

double river_survivors(std::size_t K, std::uint64_t seed, const Strategy& strategy, const RunConfig& cfg) {
  auto sys = ParticleSystem::init_river(K, seed, StepOptions{cfg.bridge_correction});
  RecordSpec spec;
  spec.series_interval = cfg.series_interval;
  return observables::survivors_scaled(run(sys, strategy, cfg.t_end, cfg.step_for(K), spec));
}

}  // namespace

std::string_view to_string(Experiment e) {
  for (const auto& [value, name] : kExperimentNames) {
    if (value == e) return name;
  }
  return "unknown";
}

Experiment experiment_from_string(std::string_view name) {
  for (const auto& [value, n] : kExperimentNames) {
    if (n == name) return value;
  }
  throw UsageError("unknown experiment '" + std::string(name) + "'");
}

double RunConfig::step_for(std::size_t k) const { return h ? *h : default_step(static_cast<double>(k)); }

RunConfig config_from_json(const json& j) {
  static const std::set<std::string> known = {
      "experiment", "K", "replicates", "seed_base", "h", "t_end", "strategy", "bridge_correction",
      "series_interval", "dt", "root_tol", "t_max", "window_lo", "window_hi", "upper_bound", "t_lo",
      "t_step", "x_max", "x_step", "laggard_tol", "tail_tol", "pass_fraction", "identity_times",
      "identity_tols", "identity_x", "atlas_gamma", "atlas_particles", "gap_rate", "lowest_gaps",
      "ks_level", "output_dir", "jobs", "check"};
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw UsageError("unknown config key '" + key + "'");
  }

  RunConfig c;
  try {
    if (j.contains("experiment")) c.experiment = experiment_from_string(j.at("experiment").get<std::string>());
    if (j.contains("K")) {
      const auto& k = j.at("K");
      c.K = k.is_array() ? k.get<std::vector<std::size_t>>() : std::vector<std::size_t>{k.get<std::size_t>()};
    }
    if (j.contains("h")) {
      const auto& h = j.at("h");
      if (h.is_string()) {
        if (h.get<std::string>() != "auto") throw UsageError("h must be a number or \"auto\"");
        c.h.reset();
      } else {
        c.h = h.get<double>();
      }
    }
    read(j, "replicates", c.replicates);
    read(j, "seed_base", c.seed_base);
    read(j, "t_end", c.t_end);
    read(j, "strategy", c.strategy);
    read(j, "bridge_correction", c.bridge_correction);
    read(j, "series_interval", c.series_interval);
    read(j, "dt", c.dt);
    read(j, "root_tol", c.root_tol);
    read(j, "t_max", c.t_max);
    read(j, "window_lo", c.window_lo);
    read(j, "window_hi", c.window_hi);
    read(j, "upper_bound", c.upper_bound);
    read(j, "t_lo", c.t_lo);
    read(j, "t_step", c.t_step);
    read(j, "x_max", c.x_max);
    read(j, "x_step", c.x_step);
    read(j, "laggard_tol", c.laggard_tol);
    read(j, "tail_tol", c.tail_tol);
    read(j, "pass_fraction", c.pass_fraction);
    read(j, "identity_times", c.identity_times);
    read(j, "identity_tols", c.identity_tols);
    read(j, "identity_x", c.identity_x);
    read(j, "atlas_gamma", c.atlas_gamma);
    read(j, "atlas_particles", c.atlas_particles);
    read(j, "gap_rate", c.gap_rate);
    read(j, "lowest_gaps", c.lowest_gaps);
    read(j, "ks_level", c.ks_level);
    read(j, "output_dir", c.output_dir);
    read(j, "jobs", c.jobs);
    read(j, "check", c.check);
  } catch (const json::exception& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  return c;
}

json config_to_json(const RunConfig& c) {
  json j = {
      {"experiment", std::string(to_string(c.experiment))},
      {"K", c.K},
      {"replicates", c.replicates},
      {"seed_base", c.seed_base},
      {"t_end", c.t_end},
      {"strategy", c.strategy},
      {"bridge_correction", c.bridge_correction},
      {"series_interval", c.series_interval},
      {"dt", c.dt},
      {"root_tol", c.root_tol},
      {"t_max", c.t_max},
      {"window_lo", c.window_lo},
      {"window_hi", c.window_hi},
      {"upper_bound", c.upper_bound},
      {"t_lo", c.t_lo},
      {"t_step", c.t_step},
      {"x_max", c.x_max},
      {"x_step", c.x_step},
      {"laggard_tol", c.laggard_tol},
      {"tail_tol", c.tail_tol},
      {"pass_fraction", c.pass_fraction},
      {"identity_times", c.identity_times},
      {"identity_tols", c.identity_tols},
      {"identity_x", c.identity_x},
      {"atlas_gamma", c.atlas_gamma},
      {"atlas_particles", c.atlas_particles},
      {"gap_rate", c.gap_rate},
      {"lowest_gaps", c.lowest_gaps},
      {"ks_level", c.ks_level},
      {"output_dir", c.output_dir},
      {"jobs", c.jobs},
      {"check", c.check},
  };
  j["h"] = c.h ? json(*c.h) : json("auto");
  return j;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw UsageError("config file '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

void validate_config(const RunConfig& c) {
  auto need = [](bool ok, const std::string& msg) {
    if (!ok) throw UsageError(msg);
  };
  need(!c.K.empty(), "K list is empty");
  for (std::size_t k : c.K) need(k >= 1, "K must be at least 1");
  need(c.replicates >= 1, "replicates must be at least 1");
  need(!c.h || *c.h > 0.0, "h must be positive");
  need(c.t_end > 0.0, "t_end must be positive");
  need(c.series_interval >= 0.0, "series_interval must be non-negative");
  need(c.dt > 0.0 && c.root_tol > 0.0, "dt and root_tol must be positive");
  need(c.t_max > stefan::kPhaseChange, "t_max must exceed 1/2");
  need(c.t_step > 0.0 && c.x_step > 0.0 && c.x_max >= 0.0, "invalid hydro grid");
  need(c.pass_fraction >= 0.0 && c.pass_fraction <= 1.0, "pass_fraction must lie in [0, 1]");
  need(c.identity_times.size() == c.identity_tols.size(), "identity_times and identity_tols differ in length");
  for (double t : c.identity_times) need(t > 0.0, "identity times must be positive");
  need(c.atlas_particles >= 2 && c.lowest_gaps >= 1, "atlas-gaps needs at least two particles and one gap");
  need(c.gap_rate > 0.0, "gap_rate must be positive");
  need(c.jobs >= 1, "jobs must be at least 1");
  if (c.experiment == Experiment::Survivors || c.experiment == Experiment::StrategySweep) {
    need(c.t_end >= 1.0, "survivor counts need t_end >= 1 (boundary detachment)");
  }
  if (c.experiment == Experiment::Survivors || c.experiment == Experiment::HydroCompare) {
    (void)strategies::by_name(c.strategy);
  }
}

// ---- commands ----

CommandResult cmd_survivors(const RunConfig& cfg) {
  const Strategy strategy = strategies::by_name(cfg.strategy);
  CommandResult result;
  json per_k = json::array();
  std::string csv = "K,replicate,seed,survivors\n";
  std::vector<double> deviations;
  for (std::size_t K : cfg.K) {
    const auto values = parallel_map<double>(cfg.replicates, cfg.jobs, [&](std::size_t r) {
      return river_survivors(K, cfg.seed_base + r, strategy, cfg);
    });
    for (std::size_t r = 0; r < values.size(); ++r) {
      csv += std::to_string(K) + "," + std::to_string(r) + "," + std::to_string(cfg.seed_base + r) + "," +
             format_double(values[r]) + "\n";
    }
    const auto s = observables::describe(values);
    const bool in_window = s.mean >= cfg.window_lo && s.mean <= cfg.window_hi;
    result.passed = result.passed && in_window;
    deviations.push_back(std::abs(s.mean - kernels::kFourOverSqrtPi));
    per_k.push_back({{"K", K}, {"h", cfg.step_for(K)}, {"survivors", stats_json(s)}, {"values", values},
                     {"deviation_from_limit", deviations.back()}, {"in_window", in_window}});
  }
  std::size_t nonincreasing = 0;
  for (std::size_t i = 1; i < deviations.size(); ++i) nonincreasing += deviations[i] <= deviations[i - 1];

  result.summary = {
      {"strategy", cfg.strategy},
      {"limit", kernels::kFourOverSqrtPi},
      {"window", {cfg.window_lo, cfg.window_hi}},
      {"per_K", per_k},
      {"trend", {{"comparisons", deviations.empty() ? 0 : deviations.size() - 1}, {"nonincreasing", nonincreasing},
                 {"enforced", false}}},
  };
  result.summary["csv"] = csv;
  return result;
}

CommandResult cmd_strategy_sweep(const RunConfig& cfg) {
  const std::size_t K = cfg.K.front();
  CommandResult result;
  std::string csv = "strategy,replicate,seed,survivors\n";
  json rows = json::array();
  std::vector<std::pair<double, std::string>> ranking;
  double null_mean = 0.0, uniform_mean = 0.0;
  for (const Strategy& strategy : strategies::builtin_strategies()) {
    const auto values = parallel_map<double>(cfg.replicates, cfg.jobs, [&](std::size_t r) {
      return river_survivors(K, cfg.seed_base + r, strategy, cfg);
    });
    bool within = true;
    for (std::size_t r = 0; r < values.size(); ++r) {
      within = within && values[r] <= cfg.upper_bound;
      csv += strategy.name + "," + std::to_string(r) + "," + std::to_string(cfg.seed_base + r) + "," +
             format_double(values[r]) + "\n";
    }
    const auto s = observables::describe(values);
    if (strategy.name == "null") null_mean = s.mean;
    if (strategy.name == "uniform") uniform_mean = s.mean;
    ranking.emplace_back(s.mean, strategy.name);
    result.passed = result.passed && within;
    rows.push_back({{"strategy", strategy.name}, {"survivors", stats_json(s)}, {"values", values},
                    {"all_within_bound", within}});
  }
  std::stable_sort(ranking.begin(), ranking.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  json order = json::array();
  for (const auto& [mean, name] : ranking) order.push_back(name);
  result.summary = {
      {"K", K},
      {"h", cfg.step_for(K)},
      {"upper_bound", cfg.upper_bound},
      {"strategies", rows},
      {"ranking", order},
      {"push_the_laggard_first", ranking.front().second == "push_the_laggard"},
      {"null_below_uniform", null_mean < uniform_mean},
  };
  result.summary["csv"] = csv;
  return result;
}

CommandResult cmd_hydro_compare(const RunConfig& cfg) {
  const std::size_t K = cfg.K.front();
  const double h = cfg.step_for(K);
  const Strategy strategy = strategies::by_name(cfg.strategy);
  const stefan::HydroProfile profile(
      stefan::solve_boundary({std::max(cfg.t_max, cfg.t_end), cfg.dt, cfg.root_tol, 0.0}));
  const std::vector<double> times = grid(cfg.t_lo, cfg.t_end, cfg.t_step);
  const std::vector<double> xs = grid(0.0, cfg.x_max, cfg.x_step);

  struct Replicate {
    observables::Deviation dev;
    std::vector<double> tail;     // times x xs
    std::vector<double> schedule;
    std::vector<double> laggard;  // NaN once extinct
  };
  const auto reps = parallel_map<Replicate>(cfg.replicates, cfg.jobs, [&](std::size_t r) {
    auto sys = ParticleSystem::init_river(K, cfg.seed_base + r, StepOptions{cfg.bridge_correction});
    RecordSpec spec;
    spec.series_interval = cfg.series_interval;
    spec.snapshot_times = times;
    const TrajectoryRecord rec = run(sys, strategy, cfg.t_end, h, spec);
    Replicate out;
    out.dev.laggard = observables::sup_deviation(rec, profile, 0.0, cfg.t_end, {}).laggard;
    out.dev.tail = observables::sup_deviation(rec, profile, cfg.t_lo, cfg.t_end, xs).tail;
    for (double t : times) {
      const TailSnapshot* snap = rec.snapshot_at(t);
      for (double x : xs) out.tail.push_back(observables::tail_count(snap->positions, static_cast<double>(K), x));
    }
    out.schedule = rec.schedule;
    for (std::size_t i = 0; i < rec.schedule.size(); ++i) {
      out.laggard.push_back(rec.laggard_series[i] ? *rec.laggard_series[i] : std::nan(""));
    }
    return out;
  });

  CommandResult result;
  std::size_t lag_ok = 0, tail_ok = 0;
  json per_rep = json::array();
  for (std::size_t r = 0; r < reps.size(); ++r) {
    lag_ok += reps[r].dev.laggard <= cfg.laggard_tol;
    tail_ok += reps[r].dev.tail <= cfg.tail_tol;
    per_rep.push_back({{"seed", cfg.seed_base + r}, {"sup_laggard", reps[r].dev.laggard}, {"sup_tail_weighted", reps[r].dev.tail}});
  }
  const double n = static_cast<double>(reps.size());
  const double lag_frac = static_cast<double>(lag_ok) / n;
  const double tail_frac = static_cast<double>(tail_ok) / n;
  result.passed = lag_frac >= cfg.pass_fraction && tail_frac >= cfg.pass_fraction;

  std::string table = "t,x,U_K_mean,U_star,weighted_abs_diff\n";
  for (std::size_t i = 0; i < times.size(); ++i) {
    for (std::size_t k = 0; k < xs.size(); ++k) {
      double mean = 0.0;
      for (const auto& rep : reps) mean += rep.tail[i * xs.size() + k];
      mean /= n;
      const double u = profile.tail(times[i], xs[k]);
      table += format_double(times[i]) + "," + format_double(xs[k]) + "," + format_double(mean) + "," +
               format_double(u) + "," + format_double(std::abs(mean - u) * std::pow(times[i], 0.75)) + "\n";
    }
  }
  std::string lag_table = "t,Z_K_mean,z\n";
  // Schedules agree across replicates unless one went extinct early.
  const auto& schedule = reps.front().schedule;
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    double mean = 0.0;
    for (const auto& rep : reps) mean += i < rep.laggard.size() ? rep.laggard[i] : std::nan("");
    lag_table += format_double(schedule[i]) + "," + format_double(mean / n) + "," +
                 format_double(profile.boundary(std::min(schedule[i], cfg.t_end))) + "\n";
  }

  result.summary = {
      {"K", K},
      {"h", h},
      {"laggard_tol", cfg.laggard_tol},
      {"tail_tol", cfg.tail_tol},
      {"laggard_pass_fraction", lag_frac},
      {"tail_pass_fraction", tail_frac},
      {"required_fraction", cfg.pass_fraction},
      {"replicates", per_rep},
  };
  result.summary["csv_tail"] = table;
  result.summary["csv_laggard"] = lag_table;
  return result;
}

double conservation_error(const stefan::BoundaryCurve& curve, double t_from) {
  double worst = 0.0;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const double t = curve.times[i];
    if (t < t_from - 1e-12) continue;
    worst = std::max(worst, std::abs(stefan::eval_tail_moving(curve, t, curve.values[i]) - kernels::kFourOverSqrtPi));
  }
  return worst;
}

CommandResult cmd_stefan_solve(const RunConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const stefan::BoundaryCurve curve = stefan::solve_boundary({cfg.t_max, cfg.dt, cfg.root_tol, 0.0});
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const double conservation = conservation_error(curve, 0.55);

  json ratios = json::array();
  for (double u : {0.02, 0.05, 0.1}) {
    const double r = curve.at(stefan::kPhaseChange + u) / (u * u);
    ratios.push_back({{"u", u}, {"z_over_u2", r}, {"relative_to_2_over_sqrt_pi", r / kernels::kTwoOverSqrtPi}});
  }

  CommandResult result;
  result.passed = conservation <= 5e-3 && !curve.monotonicity_flagged;
  result.summary = {
      {"dt", cfg.dt},
      {"root_tol", cfg.root_tol},
      {"t_max", cfg.t_max},
      {"grid_points", curve.size()},
      {"solve_seconds", seconds},
      {"max_residual", curve.residual_tol},
      {"clamped_steps", curve.clamped_steps},
      {"monotonicity_flagged", curve.monotonicity_flagged},
      {"conservation_max_error", conservation},
      {"quadratic_growth", ratios},
  };
  result.summary["csv"] = serialize::curve_to_csv(curve);
  result.summary["curve_json"] = serialize::curve_to_json(curve);
  return result;
}

CommandResult cmd_identity_test(const RunConfig& cfg) {
  const std::size_t K = cfg.K.front();
  const double h = cfg.step_for(K);
  const double t_end = *std::max_element(cfg.identity_times.begin(), cfg.identity_times.end());
  const Strategy laggard = strategies::by_name("push_the_laggard");
  const double x = cfg.identity_x;

  struct Residuals {
    std::vector<double> river, atlas;
  };
  const auto reps = parallel_map<Residuals>(cfg.replicates, cfg.jobs, [&](std::size_t r) {
    const std::uint64_t seed = cfg.seed_base + r;
    RecordSpec spec;
    spec.series_interval = cfg.series_interval;
    spec.snapshot_times = cfg.identity_times;
    spec.log_drift = true;
    auto sys = ParticleSystem::init_river(K, seed, StepOptions{cfg.bridge_correction});
    const TrajectoryRecord rec = run(sys, laggard, t_end, h, spec);

    spec.snapshot_times.push_back(0.0);
    auto atlas = sample_atlas_initial(AtlasProfile::u_bar(cfg.atlas_gamma), static_cast<double>(K), seed);
    const TrajectoryRecord arec = run_atlas(atlas, t_end, h, spec);

    Residuals out;
    for (double t : cfg.identity_times) {
      out.river.push_back(observables::identity_residual(rec, t, x));
      out.atlas.push_back(observables::atlas_identity_residual(arec, t, x));
    }
    return out;
  });

  CommandResult result;
  json rows = json::array();
  std::string csv = "replicate,seed,t,river_residual,atlas_residual\n";
  for (std::size_t i = 0; i < cfg.identity_times.size(); ++i) {
    std::vector<double> river, atlas;
    for (std::size_t r = 0; r < reps.size(); ++r) {
      river.push_back(reps[r].river[i]);
      atlas.push_back(reps[r].atlas[i]);
      csv += std::to_string(r) + "," + std::to_string(cfg.seed_base + r) + "," + format_double(cfg.identity_times[i]) +
             "," + format_double(reps[r].river[i]) + "," + format_double(reps[r].atlas[i]) + "\n";
    }
    const auto sr = observables::describe(river);
    const auto sa = observables::describe(atlas);
    const double tol = cfg.identity_tols[i];
    const bool ok = std::abs(sr.mean) <= tol && std::abs(sa.mean) <= tol;
    result.passed = result.passed && ok;
    rows.push_back({{"t", cfg.identity_times[i]}, {"tol", tol}, {"river", stats_json(sr)}, {"atlas", stats_json(sa)},
                    {"passed", ok}});
  }
  result.summary = {{"K", K}, {"h", h}, {"x", x}, {"atlas_gamma", cfg.atlas_gamma}, {"times", rows}};
  result.summary["csv"] = csv;
  return result;
}

CommandResult cmd_atlas_gaps(const RunConfig& cfg) {
  const std::size_t K = cfg.K.front();
  const double h = cfg.step_for(K);
  const double scale = std::sqrt(static_cast<double>(K));
  const auto reps = parallel_map<std::vector<double>>(cfg.replicates, cfg.jobs, [&](std::size_t r) {
    auto sys = exponential_gap_initial(cfg.atlas_particles, static_cast<double>(K), cfg.gap_rate, cfg.seed_base + r);
    RecordSpec spec;
    spec.series_interval = cfg.t_end;
    spec.snapshot_times = {cfg.t_end};
    const TrajectoryRecord rec = run_atlas(sys, cfg.t_end, h, spec);
    return observables::lowest_gaps(rec.tail_snapshots.back().positions, cfg.lowest_gaps, scale);
  });

  std::vector<double> gaps;
  std::string csv = "replicate,seed,rank,gap\n";
  for (std::size_t r = 0; r < reps.size(); ++r) {
    for (std::size_t k = 0; k < reps[r].size(); ++k) {
      gaps.push_back(reps[r][k]);
      csv += std::to_string(r) + "," + std::to_string(cfg.seed_base + r) + "," + std::to_string(k) + "," +
             format_double(reps[r][k]) + "\n";
    }
  }
  const double rate = cfg.gap_rate;
  const double d = observables::ks_statistic(gaps, [rate](double g) { return g <= 0.0 ? 0.0 : -std::expm1(-rate * g); });
  const double p = observables::ks_pvalue(d, gaps.size());

  CommandResult result;
  result.passed = p >= cfg.ks_level;
  result.summary = {
      {"K", K},
      {"h", h},
      {"particles", cfg.atlas_particles},
      {"gap_rate", rate},
      {"samples", gaps.size()},
      {"gap_stats", stats_json(observables::describe(gaps))},
      {"ks_statistic", d},
      {"ks_pvalue", p},
      {"level", cfg.ks_level},
  };
  result.summary["csv"] = csv;
  return result;
}

std::vector<CheckResult> kernel_identity_checks() {
  const std::vector<double> ts = {0.05, 0.1, 0.25, 0.5, 1.0, 1.5, 2.0};
  const std::vector<double> xs = grid(0.0, 3.0, 0.25);
  std::vector<CheckResult> out;
  auto finish = [&](std::string name, double worst, std::string detail) {
    out.push_back({std::move(name), worst <= 1e-6, worst, 1e-6, std::move(detail)});
  };

  // int_0^t p(t - s, x) ds with s = t - u^2 removes the endpoint singularity.
  auto time_integral = [](double t, double x) {
    return quadrature::integrate([&](double u) { return 2.0 * u * kernels::heat_kernel(u * u, x); }, 0.0, std::sqrt(t))
        .value;
  };

  double worst = 0.0;
  for (double t : ts)
    for (double x : xs) worst = std::max(worst, std::abs(time_integral(t, x) - kernels::heat_time_integral(t, x)));
  finish("heat_time_integral_closed_form", worst, "t in {0.05..2}, x in [0,3] step 0.25");

  worst = 0.0;
  for (double t : ts) {
    for (double x : xs) {
      const double a = std::abs(x);
      const double rhs =
          2.0 * quadrature::integrate([&](double y) { return kernels::bm_cdf(t, y); }, -a - 12.0 * std::sqrt(t), -a).value;
      worst = std::max(worst, std::abs(time_integral(t, x) - rhs));
    }
  }
  finish("heat_time_integral_cdf_form", worst, "2 int_{-inf}^{-|x|} Phi(t,y) dy");

  worst = 0.0;
  for (double t : {0.1, 0.3, 0.5}) {
    for (double x : {0.0, 0.5, 1.0, 2.0}) {
      const double tail =
          quadrature::integrate([&](double y) { return kernels::density_u1(t, y); }, x, x + 14.0 * std::sqrt(t)).value;
      worst = std::max(worst, std::abs(kernels::tail_absorption_phase(t, x) - tail));
    }
  }
  finish("absorption_profile_density", worst, "U*(t,x) vs int_x^inf u1(t,y) dy");

  worst = 0.0;
  for (auto [s, t] : {std::pair{0.2, 0.3}, {0.5, 0.5}, {1.0, 0.25}}) {
    for (double y : {0.1, 0.7, 1.5}) {
      for (double x : {0.0, 0.4, 1.2}) {
        const double hi = std::max(x, y) + 12.0 * std::sqrt(std::max(s, t));
        const double lhs = quadrature::integrate(
                               [&](double z) { return kernels::neumann_kernel(s, y, z) * kernels::neumann_kernel(t, z, x); },
                               0.0, hi)
                               .value;
        worst = std::max(worst, std::abs(lhs - kernels::neumann_kernel(s + t, y, x)));
      }
    }
  }
  finish("neumann_semigroup", worst, "int_0^inf pN(s,y,z) pN(t,z,x) dz = pN(s+t,y,x)");
  return out;
}

CommandResult cmd_validate(const RunConfig& cfg) {
  std::vector<CheckResult> checks = kernel_identity_checks();

  const stefan::BoundaryCurve curve = stefan::solve_boundary({cfg.t_max, cfg.dt, cfg.root_tol, 0.0});
  const double conservation = conservation_error(curve, 0.55);
  checks.push_back({"stefan_conservation", conservation <= 5e-3, conservation, 5e-3, "max |U*(t,z(t)) - 4/sqrt(pi)|"});
  checks.push_back({"stefan_monotone", !curve.monotonicity_flagged, curve.max_clamped_decrease, cfg.root_tol,
                    "largest clamped decrease"});

  const std::size_t K = cfg.K.front();
  const double h = cfg.step_for(K);
  const auto fractions = parallel_map<double>(cfg.replicates, cfg.jobs, [&](std::size_t r) {
    const AtlasSystem a = sample_atlas_initial(AtlasProfile::u_bar(cfg.atlas_gamma), static_cast<double>(K), cfg.seed_base + r);
    std::vector<double> shifted(a.positions().begin(), a.positions().end());
    for (double& v : shifted) v += 1.0;
    const AtlasSystem b(std::move(shifted), a.K(), a.seed());
    return coupled_run(a, b, 0.5, h).sorted_fraction();
  });
  const double worst_fraction = *std::min_element(fractions.begin(), fractions.end());
  checks.push_back({"coupling_dominance", worst_fraction >= 0.99, worst_fraction, 0.99,
                    "sorted dominance fraction, worst replicate"});

  CommandResult result;
  json list = json::array();
  for (const auto& c : checks) {
    result.passed = result.passed && c.passed;
    list.push_back({{"name", c.name}, {"passed", c.passed}, {"value", c.value}, {"threshold", c.threshold}, {"detail", c.detail}});
  }
  result.summary = {{"checks", list}};
  return result;
}

// ---- dispatch ----

namespace {

CommandResult dispatch(const RunConfig& cfg) {
  switch (cfg.experiment) {
    case Experiment::Survivors: return cmd_survivors(cfg);
    case Experiment::StrategySweep: return cmd_strategy_sweep(cfg);
    case Experiment::HydroCompare: return cmd_hydro_compare(cfg);
    case Experiment::StefanSolve: return cmd_stefan_solve(cfg);
    case Experiment::IdentityTest: return cmd_identity_test(cfg);
    case Experiment::AtlasGaps: return cmd_atlas_gaps(cfg);
    case Experiment::Validate: return cmd_validate(cfg);
  }
  throw UsageError("unhandled experiment");
}

// Moves embedded CSV payloads out of the summary into series/ files.
void write_outputs(const RunConfig& cfg, CommandResult& result) {
  namespace fs = std::filesystem;
  const fs::path dir(cfg.output_dir);
  const std::string name(to_string(cfg.experiment));
  for (const char* key : {"csv", "csv_tail", "csv_laggard"}) {
    if (!result.summary.contains(key)) continue;
    std::string file = name;
    if (std::string_view(key) != "csv") file += std::string(key).substr(3);
    write_file(dir / "series" / (file + ".csv"), result.summary[key].get<std::string>());
    result.summary.erase(key);
  }
  if (result.summary.contains("curve_json")) {
    write_file(dir / "boundary.json", result.summary["curve_json"].dump(2) + "\n");
    result.summary.erase("curve_json");
  }
  json summary = {
      {"schema_version", kSchemaVersion},
      {"timestamp", utc_timestamp()},
      {"experiment", name},
      {"passed", result.passed},
  };
  summary.update(result.summary);
  write_file(dir / "config.json", config_to_json(cfg).dump(2) + "\n");
  write_file(dir / "summary.json", summary.dump(2) + "\n");
  result.summary = std::move(summary);
}

}  // namespace

int execute(const RunConfig& cfg, std::string* error_message, bool* passed) {
  auto fail = [&](int code, const std::exception& e) {
    if (error_message) *error_message = e.what();
    return code;
  };
  try {
    validate_config(cfg);
    CommandResult result = dispatch(cfg);
    write_outputs(cfg, result);
    if (passed) *passed = result.passed;
    return (cfg.check && !result.passed) ? 1 : 0;
  } catch (const UsageError& e) {
    return fail(2, e);
  } catch (const AdvisoryError& e) {
    return fail(2, e);
  } catch (const PreconditionError& e) {
    return fail(2, e);
  } catch (const NumericalError& e) {
    return fail(3, e);
  } catch (const SolverFailure& e) {
    return fail(3, e);
  } catch (const std::exception& e) {
    return fail(3, e);
  }
}

}  // namespace uptheriver::harness
