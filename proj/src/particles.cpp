#include "uptheriver/particles.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "uptheriver/errors.hpp"
#include "uptheriver/kernels.hpp"

namespace uptheriver {

namespace {

// exp(-700) is below the smallest uniform the generator can return.
constexpr double kBridgeCutoff = 700.0;

// Step bookkeeping shared by run and run_atlas.
class Schedule {
 public:
  Schedule(double t0, double t_end, double h, const RecordSpec& spec) {
    if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("run: step h must be positive");
    if (!(t_end > t0)) throw DomainError("run: t_end must exceed the current time");
    const double span = t_end - t0;
    steps = static_cast<std::size_t>(std::max(1.0, std::ceil(span / h - 1e-9)));
    if (spec.series_interval < 0.0) throw DomainError("run: negative series interval");
    every = spec.series_interval == 0.0
                ? 1
                : static_cast<std::size_t>(std::max<long long>(1, std::llround(spec.series_interval / h)));
    for (double ts : spec.snapshot_times) {
      if (ts < t0 - 0.5 * h || ts > t_end + 0.5 * h) {
        throw DomainError("run: snapshot time " + std::to_string(ts) + " outside the run");
      }
      const auto n = static_cast<std::size_t>(std::max<long long>(0, std::llround((ts - t0) / h)));
      snapshot_steps.push_back(std::min(n, steps));
    }
    std::sort(snapshot_steps.begin(), snapshot_steps.end());
    snapshot_steps.erase(std::unique(snapshot_steps.begin(), snapshot_steps.end()), snapshot_steps.end());
  }

  bool series_due(std::size_t n) const { return n % every == 0 || n == steps; }

  // True when a snapshot falls on step n; advances the cursor.
  bool snapshot_due(std::size_t n) {
    if (cursor < snapshot_steps.size() && snapshot_steps[cursor] == n) {
      ++cursor;
      return true;
    }
    return false;
  }

  std::size_t steps = 0;
  std::size_t every = 1;
  std::vector<std::size_t> snapshot_steps;
  std::size_t cursor = 0;
};

std::vector<double> sorted_alive(const ParticleSystem& sys) {
  std::vector<double> out;
  out.reserve(sys.alive_count());
  for (std::size_t i : sys.alive_indices()) out.push_back(sys.positions()[i]);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

// ---- ParticleSystem ----

ParticleSystem::ParticleSystem(std::size_t K, std::uint64_t seed, StepOptions options)
    : positions_(K, 1.0 / std::sqrt(static_cast<double>(K))),
      alive_(K, 1),
      alive_indices_(K),
      options_(options),
      rng_(seed) {
  for (std::size_t i = 0; i < K; ++i) alive_indices_[i] = i;
  scratch_.reserve(K);
}

ParticleSystem ParticleSystem::init_river(std::size_t K, std::uint64_t seed, StepOptions options) {
  if (K == 0) throw DomainError("init_river: K must be at least 1");
  return ParticleSystem(K, seed, options);
}

std::optional<double> ParticleSystem::laggard() const {
  if (alive_indices_.empty()) return std::nullopt;
  double z = positions_[alive_indices_.front()];
  for (std::size_t i : alive_indices_) z = std::min(z, positions_[i]);
  return z;
}

SystemView ParticleSystem::view() const { return SystemView{positions_, alive_, alive_indices_, t_}; }

DriftAllocation ParticleSystem::step(const Strategy& strategy, double h) {
  return step_impl(strategy, h, rng_, nullptr);
}

DriftAllocation ParticleSystem::step(const Strategy& strategy, double h, NoiseSource& noise) {
  return step_impl(strategy, h, noise, nullptr);
}

DriftAllocation ParticleSystem::step_impl(const Strategy& strategy, double h, NoiseSource& noise,
                                          std::vector<DriftEvent>* log) {
  if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("step: h must be positive");
  const SystemView state = view();
  DriftAllocation allocation = strategy(state);
  validate_allocation(allocation, state);

  if (log) {
    for (const auto& [i, w] : allocation.entries) {
      if (w > 0.0) log->push_back(DriftEvent{t_, positions_[i], w, i});
    }
  }

  const double sqrt_h = std::sqrt(h);
  const double drift = std::sqrt(static_cast<double>(K())) * h;

  scratch_.clear();
  for (std::size_t i : alive_indices_) {
    scratch_.push_back(positions_[i]);
    positions_[i] += sqrt_h * noise.normal();
  }
  for (const auto& [i, w] : allocation.entries) positions_[i] += drift * w;

  std::size_t kept = 0;
  for (std::size_t k = 0; k < alive_indices_.size(); ++k) {
    const std::size_t i = alive_indices_[k];
    const double x = positions_[i];
    bool absorbed = !(x > 0.0);
    if (!absorbed && options_.bridge_correction) {
      const double a = 2.0 * scratch_[k] * x / h;
      if (a < kBridgeCutoff) absorbed = noise.uniform() < std::exp(-a);
    }
    if (absorbed) {
      positions_[i] = 0.0;
      alive_[i] = 0;
    } else {
      alive_indices_[kept++] = i;
    }
  }
  alive_indices_.resize(kept);

  t_ += h;
  ++step_count_;
  if (alive_indices_.empty() && !extinction_time_) extinction_time_ = t_;
  return allocation;
}

TrajectoryRecord run(ParticleSystem& sys, const Strategy& strategy, double t_end, double h,
                     const RecordSpec& spec) {
  Schedule schedule(sys.t(), t_end, h, spec);

  TrajectoryRecord rec;
  rec.meta = TrajectoryMeta{"river", sys.K(), sys.seed(), strategy.name, h, t_end, sys.options().bridge_correction};
  rec.drift_logged = spec.log_drift;

  auto record_series = [&] {
    rec.schedule.push_back(sys.t());
    rec.laggard_series.push_back(sys.laggard());
    rec.alive_series.push_back(sys.alive_count());
  };

  record_series();
  if (schedule.snapshot_due(0)) rec.tail_snapshots.push_back({sys.t(), sorted_alive(sys)});

  const double t0 = sys.t();
  for (std::size_t n = 1; n <= schedule.steps; ++n) {
    if (sys.extinct()) break;
    sys.step_impl(strategy, h, sys.rng_, spec.log_drift ? &rec.drift_log : nullptr);
    const bool extinct = sys.extinct();
    if (schedule.series_due(n) || extinct) record_series();
    if (schedule.snapshot_due(n)) rec.tail_snapshots.push_back({sys.t(), sorted_alive(sys)});
    if (extinct) {
      // Remaining snapshots are empty by definition.
      for (; schedule.cursor < schedule.snapshot_steps.size(); ++schedule.cursor) {
        const double ts = t0 + static_cast<double>(schedule.snapshot_steps[schedule.cursor]) * h;
        rec.tail_snapshots.push_back({ts, {}});
      }
    }
  }

  rec.extinction_time = sys.extinction_time();
  rec.final_time = sys.t();
  rec.final_alive = sys.alive_count();
  return rec;
}

// ---- AtlasSystem ----

AtlasSystem::AtlasSystem(std::vector<double> positions, double K, std::uint64_t seed)
    : positions_(std::move(positions)), K_(K), rng_(seed) {
  if (!(K > 0.0)) throw DomainError("AtlasSystem: K must be positive");
}

std::size_t AtlasSystem::laggard_index() const {
  if (positions_.empty()) throw DomainError("AtlasSystem: empty system has no laggard");
  std::size_t best = 0;
  for (std::size_t i = 1; i < positions_.size(); ++i) {
    if (positions_[i] < positions_[best]) best = i;
  }
  return best;
}

void AtlasSystem::step(double h) { step(h, rng_); }

void AtlasSystem::step(double h, NoiseSource& noise) {
  if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("AtlasSystem::step: h must be positive");
  const std::size_t lag = laggard_index();
  const double sqrt_h = std::sqrt(h);
  for (double& x : positions_) x += sqrt_h * noise.normal();
  positions_[lag] += std::sqrt(K_) * h;
  t_ += h;
}

TrajectoryRecord run_atlas(AtlasSystem& sys, double t_end, double h, const RecordSpec& spec) {
  if (sys.empty()) throw DomainError("run_atlas: empty system");
  Schedule schedule(sys.t(), t_end, h, spec);

  TrajectoryRecord rec;
  rec.meta = TrajectoryMeta{"atlas", static_cast<std::size_t>(std::llround(sys.K())), sys.seed(),
                            "push_the_laggard", h, t_end, false};
  rec.drift_logged = spec.log_drift;

  auto sorted_positions = [&] {
    std::vector<double> v(sys.positions().begin(), sys.positions().end());
    std::sort(v.begin(), v.end());
    return v;
  };
  auto record_series = [&] {
    rec.schedule.push_back(sys.t());
    rec.laggard_series.push_back(sys.laggard());
    rec.alive_series.push_back(sys.size());
  };

  record_series();
  if (schedule.snapshot_due(0)) rec.tail_snapshots.push_back({sys.t(), sorted_positions()});
  for (std::size_t n = 1; n <= schedule.steps; ++n) {
    if (spec.log_drift) {
      const std::size_t lag = sys.laggard_index();
      rec.drift_log.push_back(DriftEvent{sys.t(), sys.positions()[lag], 1.0, lag});
    }
    sys.step(h);
    if (schedule.series_due(n)) record_series();
    if (schedule.snapshot_due(n)) rec.tail_snapshots.push_back({sys.t(), sorted_positions()});
  }
  rec.final_time = sys.t();
  rec.final_alive = sys.size();
  return rec;
}

// ---- Atlas initial profiles ----

namespace {

void check_gamma(double g, const char* who) {
  if (!(g > 0.0 && g < 1.0 / 96.0)) {
    throw DomainError(std::string(who) + ": exponent must lie in (0, 1/96)");
  }
}

// Smallest x with U*(1/2, x) below `mass`, by bisection on the decreasing tail.
double truncation_point(double mass) {
  double lo = 0.0, hi = 1.0;
  while (kernels::tail_absorption_phase(0.5, hi) >= mass) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    (kernels::tail_absorption_phase(0.5, mid) >= mass ? lo : hi) = mid;
  }
  return hi;
}

}  // namespace

AtlasProfile AtlasProfile::u_bar(double gamma) {
  check_gamma(gamma, "u_bar");
  AtlasProfile p;
  p.kind_ = Kind::UBar;
  p.parameter_ = gamma;
  return p;
}

AtlasProfile AtlasProfile::u_under(double gamma3) {
  check_gamma(gamma3, "u_under");
  AtlasProfile p;
  p.kind_ = Kind::UUnder;
  p.parameter_ = gamma3;
  return p;
}

AtlasProfile AtlasProfile::custom(std::vector<double> xs, std::vector<double> values) {
  if (xs.size() != values.size() || xs.size() < 2) {
    throw DomainError("custom profile: need at least two (x, value) pairs of equal length");
  }
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(xs[i]) || !std::isfinite(values[i])) throw ProfileError("custom profile: non-finite entry");
    if (i > 0 && !(xs[i] > xs[i - 1])) throw DomainError("custom profile: abscissae must increase strictly");
  }
  AtlasProfile p;
  p.kind_ = Kind::Custom;
  p.xs_ = std::move(xs);
  p.values_ = std::move(values);
  return p;
}

double AtlasProfile::density(double x, double K) const {
  switch (kind_) {
    case Kind::UBar:
      return x >= std::pow(K, -parameter_) ? kernels::density_u1(0.5, x) : 0.0;
    case Kind::UUnder:
      if (x > 0.0) return kernels::density_u1(0.5, x);
      return x >= -std::pow(K, -4.0 * parameter_) ? 2.0 : 0.0;
    case Kind::Custom: {
      if (x < xs_.front() || x > xs_.back()) return 0.0;
      const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
      if (it == xs_.end()) return values_.back();
      const std::size_t j = static_cast<std::size_t>(it - xs_.begin());
      const double w = (x - xs_[j - 1]) / (xs_[j] - xs_[j - 1]);
      return (1.0 - w) * values_[j - 1] + w * values_[j];
    }
  }
  return 0.0;
}

double AtlasProfile::support_min(double K) const {
  switch (kind_) {
    case Kind::UBar: return std::pow(K, -parameter_);
    case Kind::UUnder: return -std::pow(K, -4.0 * parameter_);
    case Kind::Custom: return xs_.front();
  }
  return 0.0;
}

double AtlasProfile::support_max(double K) const {
  if (kind_ == Kind::Custom) return xs_.back();
  return truncation_point(1e-6 / std::sqrt(K));
}

double AtlasProfile::bound() const {
  // u1(1/2, .) decreases from its value 2 at the origin.
  if (kind_ != Kind::Custom) return 2.0;
  return *std::max_element(values_.begin(), values_.end());
}

double AtlasProfile::min_node_value() const {
  if (kind_ != Kind::Custom) return 0.0;
  return *std::min_element(values_.begin(), values_.end());
}

double AtlasProfile::mass(double K) const {
  switch (kind_) {
    case Kind::UBar: return kernels::tail_absorption_phase(0.5, std::pow(K, -parameter_));
    case Kind::UUnder: return kernels::tail_absorption_phase(0.5, 0.0) + 2.0 * std::pow(K, -4.0 * parameter_);
    case Kind::Custom: {
      double m = 0.0;
      for (std::size_t i = 1; i < xs_.size(); ++i) m += 0.5 * (values_[i] + values_[i - 1]) * (xs_[i] - xs_[i - 1]);
      return m;
    }
  }
  return 0.0;
}

AtlasSystem sample_atlas_initial(const AtlasProfile& profile, double K, std::uint64_t seed) {
  if (!(K >= 1.0)) throw DomainError("sample_atlas_initial: K must be at least 1");
  // Independent stream from the one the returned system steps with.
  Rng rng(seed ^ 0x9E3779B97F4A7C15ULL);
  std::vector<double> points;
  const double bound = profile.bound();
  const double lo = profile.support_min(K);
  const double hi = profile.support_max(K);
  // Thinning could step over a negative stretch of a table; check its nodes.
  if (profile.min_node_value() < 0.0) throw ProfileError("negative density in profile table");
  if (bound > 0.0 && hi > lo) {
    std::poisson_distribution<long long> count(std::sqrt(K) * bound * (hi - lo));
    const long long n = count(rng.engine());
    points.reserve(static_cast<std::size_t>(n));
    for (long long k = 0; k < n; ++k) {
      const double x = lo + (hi - lo) * rng.uniform();
      const double f = profile.density(x, K);
      if (f < 0.0) throw ProfileError("negative density " + std::to_string(f) + " at x = " + std::to_string(x));
      if (f > bound * (1.0 + 1e-12)) throw ProfileError("density exceeds its dominating constant");
      if (bound * rng.uniform() < f) points.push_back(x);
    }
  }
  std::sort(points.begin(), points.end());
  return AtlasSystem(std::move(points), K, seed);
}

AtlasSystem exponential_gap_initial(std::size_t n, double K, double rate, std::uint64_t seed) {
  if (n == 0) throw DomainError("exponential_gap_initial: n must be at least 1");
  if (!(rate > 0.0)) throw DomainError("exponential_gap_initial: rate must be positive");
  Rng rng(seed ^ 0x9E3779B97F4A7C15ULL);
  std::exponential_distribution<double> gap(rate);
  std::vector<double> x(n, 0.0);
  const double scale = 1.0 / std::sqrt(K);
  for (std::size_t i = 1; i < n; ++i) x[i] = x[i - 1] + scale * gap(rng.engine());
  return AtlasSystem(std::move(x), K, seed);
}

// ---- coupling ----

double DominanceReport::sorted_fraction() const {
  return steps == 0 ? 1.0 : 1.0 - static_cast<double>(sorted_violations) / static_cast<double>(steps);
}

double DominanceReport::laggard_fraction() const {
  return steps == 0 ? 1.0 : 1.0 - static_cast<double>(laggard_violations) / static_cast<double>(steps);
}

DominanceReport coupled_run(const AtlasSystem& a, const AtlasSystem& b, double t_end, double h) {
  if (!(h > 0.0)) throw DomainError("coupled_run: h must be positive");
  if (!(t_end > 0.0)) throw DomainError("coupled_run: t_end must be positive");
  if (a.empty() || b.empty()) throw DomainError("coupled_run: empty system");
  if (b.size() > a.size()) throw PreconditionError("coupled_run: B has more particles than A");

  AtlasSystem A = a;
  AtlasSystem B = b;
  auto& xa = A.mutable_positions();
  auto& xb = B.mutable_positions();
  std::sort(xa.begin(), xa.end());
  std::sort(xb.begin(), xb.end());
  const std::size_t m = xb.size();
  for (std::size_t i = 0; i < m; ++i) {
    if (xb[i] < xa[i]) throw PreconditionError("coupled_run: B does not dominate A at rank " + std::to_string(i));
  }

  DominanceReport report;
  const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil((t_end - A.t()) / h - 1e-9)));
  const double sqrt_h = std::sqrt(h);
  std::vector<double> xi(xa.size());
  report.sorted_dominance.reserve(steps);
  for (std::size_t n = 0; n < steps; ++n) {
    for (double& v : xi) v = sqrt_h * A.rng().normal();
    for (std::size_t i = 0; i < xa.size(); ++i) xa[i] += xi[i];
    for (std::size_t i = 0; i < m; ++i) xb[i] += xi[i];
    // Both arrays are sorted, so rank 0 is the laggard.
    xa[0] += std::sqrt(A.K()) * h;
    xb[0] += std::sqrt(B.K()) * h;
    std::sort(xa.begin(), xa.end());
    std::sort(xb.begin(), xb.end());
    A.advance_clock(h);
    B.advance_clock(h);

    bool ok = true;
    for (std::size_t i = 0; i < m && ok; ++i) ok = xb[i] >= xa[i];
    report.sorted_dominance.push_back(ok ? 1 : 0);
    if (!ok) ++report.sorted_violations;
    if (xb[0] < xa[0]) ++report.laggard_violations;
    ++report.steps;
  }
  return report;
}

}  // namespace uptheriver
