#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "palpa/image.hpp"

namespace palpa {

inline constexpr double kStandardGravity = 9.80665;

/// Grams-force to newtons.
inline double grams_to_newtons(double grams) { return grams * kStandardGravity / 1000.0; }

/// Parameters of the simulated photonic membrane. Gains map indentation to an
/// additive HSV shift; the baseline colour field is generated from `pattern_seed`.
struct MembraneParams {
  double hue_gain_deg_per_mm = 31.0;
  double saturation_gain_per_mm = -0.2;
  double value_gain_per_mm = -0.1;
  double noise_std = 0.4;           // 8-bit channel units
  double speckle_amplitude = 0.02;  // relative, fixed glare pattern
  double stiffness_n_per_mm3 = 0.85;
  double max_depth_mm = kDefaultMaxDepth;

  std::uint64_t pattern_seed = 20240611;
  double base_hue_deg = 0.0;
  double hue_variation_deg = 3.0;
  double base_saturation = 0.80;
  double saturation_variation = 0.04;
  double base_value = 0.78;
  double value_variation = 0.04;

  void validate() const;
};

/// Membrane colour response bound to a sensor geometry.
class MembraneModel {
 public:
  MembraneModel(const SensorGeometry& geom, const MembraneParams& params);

  const SensorGeometry& geometry() const { return geom_; }
  const MembraneParams& params() const { return params_; }
  const HsvImage& baseline() const { return baseline_; }
  /// Per-pixel speckle deviate n(u, v), fixed for the membrane.
  const std::vector<float>& speckle() const { return speckle_; }

  double max_depth() const { return params_.max_depth_mm; }
  double stiffness() const { return params_.stiffness_n_per_mm3; }

  /// Noise-free colour of one pixel at indentation `depth_mm`.
  Hsv shifted_colour(std::size_t pixel, double depth_mm) const;

 private:
  SensorGeometry geom_;
  MembraneParams params_;
  HsvImage baseline_;
  std::vector<float> speckle_;
};

/// Foundation moduli of the tissue phantom, N/mm^3.
struct TissueParams {
  double tissue_stiffness = 0.02;
  double tumor_stiffness_boost = 0.06;
  double attenuation_length_mm = 3.0;
};

struct PhantomConfig {
  bool tumor_present = false;
  double ball_diameter_mm = 6.0;
  double burial_depth_mm = 3.0;
  double offset_x_mm = 0.0;
  double offset_y_mm = 0.0;
  double tissue_stiffness = 0.02;
  double tumor_stiffness_boost = 0.06;
  double attenuation_length_mm = 3.0;
  double applied_mass_g = 1000.0;

  static PhantomConfig with_tissue(const TissueParams& tissue);
  double applied_force_n() const { return grams_to_newtons(applied_mass_g); }
  void validate() const;
};

/// Row-major scalar grid matching an image raster.
struct ScalarField {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  double at(int col, int row) const { return values[static_cast<std::size_t>(row) * width + col]; }
};

/// Foundation modulus k(x, y): the tissue value plus a Gaussian boost of
/// width d / (2 sqrt 2) centred over the tumour, attenuated by exp(-depth / lambda).
ScalarField stiffness_field(const PhantomConfig& cfg, const SensorGeometry& geom);

struct ContactSolution {
  ScalarField pressure;           // N/mm^2, zero outside the sensing disc
  double rigid_displacement_mm = 0.0;
  double applied_force_n = 0.0;
  DeformationMap deformation;
};

class DegenerateFoundation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rigid flat punch on a Winkler foundation over the sensing disc.
ContactSolution contact_solve(const PhantomConfig& cfg, const SensorGeometry& geom,
                              const MembraneModel& model);

/// Spherical-cap depth at radius r for a sphere of radius R pressed by delta.
double sphere_cap_depth(double r_mm, double press_depth_mm, double sphere_radius_mm);

/// Truth map of a rigid sphere pressed `press_depth_mm` into the membrane,
/// centred at (center_x_mm, center_y_mm) relative to the image centre.
DeformationMap sphere_press_truth(double press_depth_mm, double sphere_radius_mm,
                                  const SensorGeometry& geom,
                                  double max_depth_mm = kDefaultMaxDepth,
                                  double center_x_mm = 0.0, double center_y_mm = 0.0);

/// Noise-free HSV reading for `dmap`, before 8-bit quantization.
HsvImage render_hsv(const DeformationMap& dmap, const MembraneModel& model);

/// Camera reading of the membrane under `dmap`. Channel noise is a pure
/// function of (seed, pixel, channel).
RgbImage render_reading(const DeformationMap& dmap, const MembraneModel& model,
                        std::uint64_t seed);

}  // namespace palpa
