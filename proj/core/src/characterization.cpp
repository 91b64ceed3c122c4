#include "palpa/characterization.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "palpa/random.hpp"

namespace palpa {

namespace {

struct DepthStats {
  double mean = 0.0;
  double max = 0.0;
};

DepthStats masked_stats(const DeformationMap& map) {
  const auto depths = map.depths();
  const auto mask = map.mask();
  DepthStats s;
  std::size_t n = 0;
  for (std::size_t i = 0; i < depths.size(); ++i) {
    if (!mask[i]) continue;
    s.mean += depths[i];
    s.max = std::max(s.max, static_cast<double>(depths[i]));
    ++n;
  }
  if (n > 0) s.mean /= static_cast<double>(n);
  return s;
}

// Reading pair for a truth map; the reference frame never shares noise with the contact frame.
DeformationMap measure(const MembraneModel& model, const DepthReconstructor& recon,
                       const DeformationMap& truth, std::uint64_t seed) {
  const RgbImage ref = render_reading(DeformationMap(model.geometry()), model, derive_seed(seed, 0));
  const RgbImage cur = render_reading(truth, model, derive_seed(seed, 1));
  return recon(ref, cur);
}

// Smooth lag profile: zero at both ends of the load range, peak at mid-range.
double lag_profile(double x) { return 4.0 * x * (1.0 - x); }

}  // namespace

void RigConfig::validate() const {
  if (!(indenter_radius_mm > 0.0) || !(stiffness_n_per_mm3 > 0.0) || !(full_scale_depth_mm > 0.0)) {
    throw std::invalid_argument("rig geometry and stiffness must be positive");
  }
  if (full_scale_depth_mm > indenter_radius_mm) {
    throw std::invalid_argument("full-scale depth exceeds the indenter radius");
  }
  if (!(force_step_n > 0.0) || !(force_max_n > force_step_n)) {
    throw std::invalid_argument("force grid must have a positive step below the maximum");
  }
  if (trials < 2) throw std::invalid_argument("at least two trials are required");
  if (depth_steps < 1 || hysteresis_points < 3) throw std::invalid_argument("too few rig steps");
  if (smoothing_window < 1 || smoothing_window % 2 == 0) {
    throw std::invalid_argument("smoothing window must be odd and positive");
  }
  if (unloading_lag_mm < 0.0 || seating_error_mm < 0.0 || reading_jitter_mm < 0.0 || detection_sigmas < 0.0) {
    throw std::invalid_argument("rig noise/lag parameters must be non-negative");
  }
}

void ForceSweep::validate() const {
  for (std::size_t i = 1; i < points.size(); ++i) {
    const bool ok = direction == SweepDirection::loading
                        ? points[i].force_n > points[i - 1].force_n
                        : points[i].force_n < points[i - 1].force_n;
    if (!ok) throw std::invalid_argument("sweep forces are not strictly monotone");
  }
}

SensitivityResult analyze_sensitivity(const ForceSweep& sweep, double noise_floor_mm,
                                      double detection_sigmas, double baseline_mm) {
  if (sweep.points.empty()) throw std::invalid_argument("empty sweep");
  sweep.validate();
  SensitivityResult out;
  out.noise_floor_mm = noise_floor_mm;
  out.baseline_mm = baseline_mm;
  out.sweep = sweep;
  std::vector<SweepPoint> pts = sweep.points;
  if (sweep.direction == SweepDirection::unloading) std::ranges::reverse(pts);

  const double detect = detection_sigmas * noise_floor_mm;
  std::size_t first_detected = pts.size();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i].mean_depth_mm - baseline_mm > detect) {
      out.threshold_n = pts[i].force_n;
      first_detected = i;
      break;
    }
  }
  for (std::size_t i = first_detected; i + 1 < pts.size(); ++i) {
    if (std::abs(pts[i + 1].max_depth_mm - pts[i].max_depth_mm) > noise_floor_mm) {
      const double step = pts[i + 1].force_n - pts[i].force_n;
      if (!out.resolution_n || step < *out.resolution_n) out.resolution_n = step;
    }
  }
  for (const auto& p : pts) {
    if (p.clamped) {
      out.saturation_n = p.force_n;
      break;
    }
  }
  return out;
}

IndenterRig::IndenterRig(const MembraneModel& model, const RigConfig& cfg)
    : geom_(model.geometry()), max_depth_mm_(model.max_depth()), cfg_(cfg) {
  cfg_.validate();
  const auto mask = geom_.disc_mask();
  for (int row = 0; row < geom_.height; ++row) {
    for (int col = 0; col < geom_.width; ++col) {
      const std::size_t i = static_cast<std::size_t>(row) * geom_.width + col;
      if (!mask[i]) continue;
      pixels_.push_back(i);
      radii_mm_.push_back(std::hypot(geom_.x_mm(col), geom_.y_mm(row)));
    }
  }
}

double IndenterRig::force_for_depth(double depth_mm) const {
  double volume = 0.0;
  for (double r : radii_mm_) volume += sphere_cap_depth(r, depth_mm, cfg_.indenter_radius_mm);
  return cfg_.stiffness_n_per_mm3 * volume * geom_.pixel_area_mm2();
}

double IndenterRig::depth_for_force(double force_n) const {
  if (force_n < 0.0) throw std::invalid_argument("force must be non-negative");
  if (force_n == 0.0) return 0.0;
  double lo = 0.0;
  double hi = cfg_.indenter_radius_mm;
  if (force_for_depth(hi) < force_n) {
    throw std::invalid_argument("force exceeds what the indenter can transmit");
  }
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    (force_for_depth(mid) < force_n ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

DeformationMap IndenterRig::truth_for_depth(double depth_mm, bool* clamped) const {
  DeformationMap map(geom_);
  auto depths = map.depths();
  bool hit = false;
  for (std::size_t k = 0; k < pixels_.size(); ++k) {
    const double d = sphere_cap_depth(radii_mm_[k], depth_mm, cfg_.indenter_radius_mm);
    if (d >= max_depth_mm_) hit = true;
    depths[pixels_[k]] = static_cast<float>(std::min(d, max_depth_mm_));
  }
  if (clamped) *clamped = hit;
  return map;
}

NoiseFloor measure_noise_floor(const MembraneModel& model, const DepthReconstructor& recon,
                               std::uint64_t seed) {
  const DeformationMap flat(model.geometry());
  const DeformationMap null_map = measure(model, recon, flat, seed);
  const auto depths = null_map.depths();
  const auto mask = null_map.mask();
  double sum = 0.0, sq = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < depths.size(); ++i) {
    if (!mask[i]) continue;
    sum += depths[i];
    ++n;
  }
  const double mean = sum / static_cast<double>(n);
  for (std::size_t i = 0; i < depths.size(); ++i) {
    if (mask[i]) sq += (depths[i] - mean) * (depths[i] - mean);
  }
  return {std::sqrt(sq / static_cast<double>(n)), mean};
}

std::vector<double> default_force_grid(const RigConfig& cfg) {
  cfg.validate();
  std::vector<double> forces;
  for (int k = 1;; ++k) {
    const double f = k * cfg.force_step_n;
    if (f > cfg.force_max_n * (1.0 + 1e-12)) break;
    forces.push_back(f);
  }
  return forces;
}

SensitivityResult sensitivity_profile(const MembraneModel& model, const RigConfig& rig_cfg,
                                      const DepthReconstructor& recon,
                                      std::span<const double> forces, std::uint64_t seed) {
  if (forces.empty()) throw std::invalid_argument("empty sweep");
  if (forces.size() < 3) throw std::invalid_argument("sensitivity sweep needs at least 3 forces");
  const IndenterRig rig(model, rig_cfg);
  const NoiseFloor floor = measure_noise_floor(model, recon, derive_seed(seed, 0xF100));

  ForceSweep sweep;
  sweep.direction = SweepDirection::loading;
  for (std::size_t k = 0; k < forces.size(); ++k) {
    bool clamped = false;
    const DeformationMap truth = rig.truth_for_depth(rig.depth_for_force(forces[k]), &clamped);
    const DepthStats s = masked_stats(measure(model, recon, truth, derive_seed(seed, k + 1)));
    sweep.points.push_back({forces[k], s.mean, s.max, clamped});
  }
  return analyze_sensitivity(sweep, floor.std_mm, rig_cfg.detection_sigmas, floor.mean_mm);
}

void TrialSet::validate() const {
  if (trials.size() < 2) throw std::invalid_argument("a trial set needs at least two trials");
  if (!(full_scale_mm > 0.0)) throw std::invalid_argument("full-scale depth must be positive");
  for (const auto& t : trials) {
    if (t.size() != steps_mm.size()) throw std::invalid_argument("mismatched schedules across trials");
  }
}

double percent_of_full_scale(double delta_mm, double full_scale_mm) {
  if (!(full_scale_mm > 0.0)) throw std::invalid_argument("full-scale depth must be positive");
  if (!(delta_mm >= 0.0)) throw std::invalid_argument("depth difference must be non-negative");
  return delta_mm / full_scale_mm * 100.0;
}

double repeatability(const TrialSet& set) {
  set.validate();
  double worst = 0.0;
  for (std::size_t s = 0; s < set.steps_mm.size(); ++s) {
    double lo = set.trials.front()[s];
    double hi = lo;
    for (const auto& t : set.trials) {
      lo = std::min(lo, t[s]);
      hi = std::max(hi, t[s]);
    }
    worst = std::max(worst, hi - lo);
  }
  return percent_of_full_scale(worst, set.full_scale_mm);
}

double hysteresis(const ForceSweep& loading, const ForceSweep& unloading, double full_scale_mm) {
  if (!(full_scale_mm > 0.0)) throw std::invalid_argument("full-scale depth must be positive");
  loading.validate();
  unloading.validate();
  auto up = loading.points;
  auto down = unloading.points;
  if (loading.direction == SweepDirection::unloading) std::ranges::reverse(up);
  if (unloading.direction == SweepDirection::unloading) std::ranges::reverse(down);
  if (up.size() != down.size() || up.empty()) throw std::invalid_argument("grid mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < up.size(); ++i) {
    const double tol = 1e-9 * std::max(1.0, std::abs(up[i].force_n));
    if (std::abs(up[i].force_n - down[i].force_n) > tol) throw std::invalid_argument("grid mismatch");
    worst = std::max(worst, std::abs(up[i].max_depth_mm - down[i].max_depth_mm));
  }
  return percent_of_full_scale(worst, full_scale_mm);
}

std::vector<double> moving_average(std::span<const double> values, int window) {
  if (window < 1 || window % 2 == 0) throw std::invalid_argument("window must be odd and positive");
  const auto n = static_cast<std::ptrdiff_t>(values.size());
  const std::ptrdiff_t half = window / 2;
  std::vector<double> out(values.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::ptrdiff_t reach = std::min({half, i, n - 1 - i});
    double sum = 0.0;
    for (std::ptrdiff_t k = i - reach; k <= i + reach; ++k) sum += values[static_cast<std::size_t>(k)];
    out[static_cast<std::size_t>(i)] = sum / static_cast<double>(2 * reach + 1);
  }
  return out;
}

ForceSweep smoothed(const ForceSweep& sweep, int window) {
  std::vector<double> mean, max;
  for (const auto& p : sweep.points) {
    mean.push_back(p.mean_depth_mm);
    max.push_back(p.max_depth_mm);
  }
  const auto sm_mean = moving_average(mean, window);
  const auto sm_max = moving_average(max, window);
  ForceSweep out = sweep;
  for (std::size_t i = 0; i < out.points.size(); ++i) {
    out.points[i].mean_depth_mm = sm_mean[i];
    out.points[i].max_depth_mm = sm_max[i];
  }
  return out;
}

double null_difference_stat(const RgbImage& before, const RgbImage& after,
                            const SensorGeometry& geom) {
  require_same_size(before.width(), before.height(), after.width(), after.height(),
                    "null_difference_stat");
  require_same_size(before.width(), before.height(), geom.width, geom.height,
                    "null_difference_stat");
  const auto mask = geom.disc_mask();
  const auto a = before.bytes();
  const auto b = after.bytes();
  double sum = 0.0, sq = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    for (std::size_t c = 0; c < 3; ++c) {
      const double d = static_cast<double>(b[3 * i + c]) - static_cast<double>(a[3 * i + c]);
      sum += d;
      sq += d * d;
      ++n;
    }
  }
  if (n == 0) return 0.0;
  const double mean = sum / static_cast<double>(n);
  return std::sqrt(std::max(0.0, sq / static_cast<double>(n) - mean * mean));
}

TrialSet run_repeatability(const MembraneModel& model, const RigConfig& rig_cfg,
                           const DepthReconstructor& recon, std::uint64_t seed) {
  const IndenterRig rig(model, rig_cfg);
  TrialSet set;
  set.full_scale_mm = rig_cfg.full_scale_depth_mm;
  for (int s = 1; s <= rig_cfg.depth_steps; ++s) {
    set.steps_mm.push_back(rig_cfg.full_scale_depth_mm * s / rig_cfg.depth_steps);
  }
  const CounterRng jitter(seed, 0x7E9);
  const CounterRng seating(seed, 0x5EA7);
  for (int t = 0; t < rig_cfg.trials; ++t) {
    std::vector<double> measured;
    const double offset = rig_cfg.seating_error_mm * seating.normal(static_cast<std::uint64_t>(t));
    for (std::size_t s = 0; s < set.steps_mm.size(); ++s) {
      const std::uint64_t key = static_cast<std::uint64_t>(t) * 4096 + s;
      const double depth =
          std::clamp(set.steps_mm[s] + offset + rig_cfg.reading_jitter_mm * jitter.normal(key), 1e-6,
                     rig_cfg.indenter_radius_mm);
      const DeformationMap truth = rig.truth_for_depth(depth);
      measured.push_back(masked_stats(measure(model, recon, truth, derive_seed(seed, key))).max);
    }
    set.trials.push_back(std::move(measured));
  }
  return set;
}

HysteresisRun run_hysteresis(const MembraneModel& model, const RigConfig& rig_cfg,
                             const DepthReconstructor& recon, std::uint64_t seed) {
  const IndenterRig rig(model, rig_cfg);
  const double full_force = rig.force_for_depth(rig_cfg.full_scale_depth_mm);
  const int n = rig_cfg.hysteresis_points;
  std::vector<double> grid;
  for (int i = 0; i < n; ++i) grid.push_back(full_force * i / (n - 1));

  const CounterRng jitter(seed, 0x4157);
  const CounterRng seating(seed, 0x5EA8);
  HysteresisRun run;
  for (int t = 0; t < rig_cfg.trials; ++t) {
    const double offset = rig_cfg.seating_error_mm * seating.normal(static_cast<std::uint64_t>(t));
    ForceSweep up{SweepDirection::loading, {}};
    ForceSweep down{SweepDirection::unloading, {}};
    for (int i = 0; i < n; ++i) {
      const double x = grid[static_cast<std::size_t>(i)] / full_force;
      const double load_depth = rig.depth_for_force(grid[static_cast<std::size_t>(i)]);
      const double lag = rig_cfg.unloading_lag_mm * lag_profile(x);
      for (int dir = 0; dir < 2; ++dir) {
        const std::uint64_t key = (static_cast<std::uint64_t>(t) * 2 + dir) * 4096 + i;
        double depth = dir == 0 ? load_depth : load_depth - lag;
        depth += offset + rig_cfg.reading_jitter_mm * jitter.normal(key);
        depth = std::clamp(depth, 0.0, rig_cfg.indenter_radius_mm);
        bool clamped = false;
        const DeformationMap truth = depth > 0.0 ? rig.truth_for_depth(depth, &clamped)
                                                 : DeformationMap(model.geometry());
        const DepthStats s = masked_stats(measure(model, recon, truth, derive_seed(seed, key)));
        (dir == 0 ? up : down).points.push_back({grid[static_cast<std::size_t>(i)], s.mean, s.max, clamped});
      }
    }
    std::ranges::reverse(down.points);
    run.loading_trials.push_back(std::move(up));
    run.unloading_trials.push_back(std::move(down));
  }

  auto trial_mean = [&](const std::vector<ForceSweep>& sweeps, SweepDirection dir) {
    ForceSweep mean{dir, sweeps.front().points};
    for (std::size_t i = 0; i < mean.points.size(); ++i) {
      double m = 0.0, mx = 0.0;
      bool clamped = false;
      for (const auto& sw : sweeps) {
        m += sw.points[i].mean_depth_mm;
        mx += sw.points[i].max_depth_mm;
        clamped = clamped || sw.points[i].clamped;
      }
      mean.points[i].mean_depth_mm = m / static_cast<double>(sweeps.size());
      mean.points[i].max_depth_mm = mx / static_cast<double>(sweeps.size());
      mean.points[i].clamped = clamped;
    }
    return smoothed(mean, rig_cfg.smoothing_window);
  };
  run.loading = trial_mean(run.loading_trials, SweepDirection::loading);
  run.unloading = trial_mean(run.unloading_trials, SweepDirection::unloading);
  run.h_pct = hysteresis(run.loading, run.unloading, rig_cfg.full_scale_depth_mm);
  return run;
}

CharacterizationSummary run_characterization(const MembraneModel& model, const RigConfig& rig,
                                             const DepthReconstructor& recon,
                                             std::uint64_t seed) {
  CharacterizationSummary out;
  const auto forces = default_force_grid(rig);
  out.sensitivity = sensitivity_profile(model, rig, recon, forces, derive_seed(seed, 1));
  out.repeatability_trials = run_repeatability(model, rig, recon, derive_seed(seed, 2));
  out.r_pct = repeatability(out.repeatability_trials);
  out.hysteresis = run_hysteresis(model, rig, recon, derive_seed(seed, 3));
  const DeformationMap flat(model.geometry());
  const auto null_seed = derive_seed(seed, 4);
  out.null_std = null_difference_stat(render_reading(flat, model, derive_seed(null_seed, 0)),
                                      render_reading(flat, model, derive_seed(null_seed, 1)),
                                      model.geometry());
  return out;
}

}  // namespace palpa
