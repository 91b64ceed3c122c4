#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "palpa/calibration.hpp"
#include "palpa/image.hpp"
#include "palpa/phantom.hpp"

namespace palpa {

/// Bench rig: a rigid spherical indenter pressed on the bare membrane, which
/// rests on a Winkler foundation of its own modulus.
struct RigConfig {
  double indenter_radius_mm = 1.19;
  double stiffness_n_per_mm3 = 0.1366;
  double full_scale_depth_mm = 0.5;  // d_M
  double force_step_n = 0.0006;
  double force_max_n = 0.12;
  double detection_sigmas = 3.0;
  int trials = 5;
  int depth_steps = 10;
  int hysteresis_points = 21;
  int smoothing_window = 3;
  /// Peak loading-minus-unloading indentation gap (viscoelastic lag), mm.
  double unloading_lag_mm = 0.183;
  /// Indenter seating error, mm (1 sigma): one offset per trial, held for the
  /// whole trial, plus an independent jitter on every reading.
  double seating_error_mm = 0.035;
  double reading_jitter_mm = 0.01;

  void validate() const;
};

enum class SweepDirection { loading, unloading };

struct SweepPoint {
  double force_n = 0.0;
  double mean_depth_mm = 0.0;  // mean over the sensing disc
  double max_depth_mm = 0.0;
  bool clamped = false;  // the membrane depth limit is active somewhere
};

struct ForceSweep {
  SweepDirection direction = SweepDirection::loading;
  std::vector<SweepPoint> points;

  /// Throws unless forces are strictly monotone in the sweep direction.
  void validate() const;
};

struct SensitivityResult {
  std::optional<double> threshold_n;
  std::optional<double> resolution_n;
  std::optional<double> saturation_n;
  double noise_floor_mm = 0.0;
  double baseline_mm = 0.0;  // unloaded mean depth
  ForceSweep sweep;
};

/// threshold: least force whose mean depth exceeds the unloaded baseline by
/// detection_sigmas x floor.
/// resolution: least force step between adjacent detected points whose max
/// depths differ by more than the floor. saturation: least clamped force.
SensitivityResult analyze_sensitivity(const ForceSweep& sweep, double noise_floor_mm,
                                      double detection_sigmas = 3.0, double baseline_mm = 0.0);

class IndenterRig {
 public:
  IndenterRig(const MembraneModel& model, const RigConfig& cfg);

  const RigConfig& config() const { return cfg_; }
  /// Contact force for indentation `depth_mm` (pixel quadrature over the disc).
  double force_for_depth(double depth_mm) const;
  double depth_for_force(double force_n) const;
  /// Clamped truth map and whether the clamp engaged.
  DeformationMap truth_for_depth(double depth_mm, bool* clamped = nullptr) const;

 private:
  SensorGeometry geom_;
  double max_depth_mm_;
  RigConfig cfg_;
  std::vector<double> radii_mm_;  // per in-disc pixel
  std::vector<std::size_t> pixels_;
};

/// Standard deviation (and mean) of the reconstruction of an unloaded reading pair.
struct NoiseFloor {
  double std_mm = 0.0;
  double mean_mm = 0.0;
};
NoiseFloor measure_noise_floor(const MembraneModel& model, const DepthReconstructor& recon,
                               std::uint64_t seed);

/// Forces step, 2*step, ... up to max.
std::vector<double> default_force_grid(const RigConfig& cfg);

SensitivityResult sensitivity_profile(const MembraneModel& model, const RigConfig& rig,
                                      const DepthReconstructor& recon,
                                      std::span<const double> forces, std::uint64_t seed);

struct TrialSet {
  std::vector<double> steps_mm;
  std::vector<std::vector<double>> trials;  // trials[t][step]
  double full_scale_mm = kDefaultMaxDepth;

  void validate() const;
};

/// 100 x delta / full scale: the common form of r and h.
double percent_of_full_scale(double delta_mm, double full_scale_mm);

/// 100 x max over steps of (max - min across trials) / full scale.
double repeatability(const TrialSet& trials);

/// 100 x max over the shared grid of |loading - unloading| / full scale.
/// Sweeps may be given in their natural order; they are aligned by force.
double hysteresis(const ForceSweep& loading, const ForceSweep& unloading, double full_scale_mm);

/// Centred moving average; the window shrinks symmetrically at the ends.
std::vector<double> moving_average(std::span<const double> values, int window);
ForceSweep smoothed(const ForceSweep& sweep, int window);

/// Population standard deviation of all channel differences inside the disc.
double null_difference_stat(const RgbImage& before, const RgbImage& after,
                            const SensorGeometry& geom);

TrialSet run_repeatability(const MembraneModel& model, const RigConfig& rig,
                           const DepthReconstructor& recon, std::uint64_t seed);

struct HysteresisRun {
  std::vector<ForceSweep> loading_trials;
  std::vector<ForceSweep> unloading_trials;
  ForceSweep loading;    // trial mean, smoothed
  ForceSweep unloading;  // trial mean, smoothed
  double h_pct = 0.0;
};

HysteresisRun run_hysteresis(const MembraneModel& model, const RigConfig& rig,
                             const DepthReconstructor& recon, std::uint64_t seed);

struct CharacterizationSummary {
  SensitivityResult sensitivity;
  TrialSet repeatability_trials;
  double r_pct = 0.0;
  HysteresisRun hysteresis;
  double null_std = 0.0;
};

CharacterizationSummary run_characterization(const MembraneModel& model, const RigConfig& rig,
                                             const DepthReconstructor& recon,
                                             std::uint64_t seed);

}  // namespace palpa
