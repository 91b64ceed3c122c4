#include "palpa/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "palpa/color.hpp"
#include "palpa/random.hpp"

namespace palpa {

namespace {

constexpr std::uint64_t kSpeckleStream = 2;
constexpr std::uint64_t kSensorNoiseStream = 1;

// Smooth field made of a few long-wavelength plane waves, peak |f| <= amplitude.
struct SmoothField {
  struct Wave {
    double kx, ky, phase, weight;
  };
  std::vector<Wave> waves;

  SmoothField(SeqRng& rng, double amplitude, double disc_diameter_mm) {
    constexpr int kWaves = 3;
    double total = 0.0;
    for (int k = 0; k < kWaves; ++k) {
      // wavelengths between one and four disc diameters
      const double cycles_per_mm = rng.uniform(0.25, 1.0) / disc_diameter_mm;
      const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
      const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
      const double weight = rng.uniform(0.5, 1.0);
      waves.push_back({2.0 * std::numbers::pi * cycles_per_mm * std::cos(angle),
                       2.0 * std::numbers::pi * cycles_per_mm * std::sin(angle), phase, weight});
      total += weight;
    }
    for (auto& w : waves) w.weight *= amplitude / total;
  }

  double operator()(double x, double y) const {
    double f = 0.0;
    for (const auto& w : waves) f += w.weight * std::cos(w.kx * x + w.ky * y + w.phase);
    return f;
  }
};

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string(name) + " must be positive and finite");
  }
}

}  // namespace

void MembraneParams::validate() const {
  require_positive(stiffness_n_per_mm3, "membrane stiffness");
  require_positive(max_depth_mm, "maximum depth");
  for (double g : {hue_gain_deg_per_mm, saturation_gain_per_mm, value_gain_per_mm, base_hue_deg,
                   hue_variation_deg, noise_std, speckle_amplitude}) {
    if (!std::isfinite(g)) throw std::invalid_argument("membrane parameters must be finite");
  }
  if (noise_std < 0.0 || speckle_amplitude < 0.0) {
    throw std::invalid_argument("noise parameters must be non-negative");
  }
  const double s_lo = base_saturation - saturation_variation;
  const double s_hi = base_saturation + saturation_variation;
  const double v_lo = base_value - value_variation;
  const double v_hi = base_value + value_variation;
  if (s_lo < 0.0 || s_hi > 1.0 || v_lo < 0.0 || v_hi > 1.0) {
    throw std::invalid_argument("baseline saturation/value range leaves [0, 1]");
  }
  const double s_end = std::min(s_lo, s_lo + saturation_gain_per_mm * max_depth_mm);
  const double s_top = std::max(s_hi, s_hi + saturation_gain_per_mm * max_depth_mm);
  const double v_end = std::min(v_lo, v_lo + value_gain_per_mm * max_depth_mm);
  const double v_top = std::max(v_hi, v_hi + value_gain_per_mm * max_depth_mm);
  if (s_end < 0.0 || s_top > 1.0 || v_end < 0.0 || v_top > 1.0) {
    throw std::invalid_argument("membrane gains drive saturation/value out of range before max depth");
  }
  if (std::abs(hue_gain_deg_per_mm) * max_depth_mm + hue_variation_deg >= 180.0) {
    throw std::invalid_argument("hue gain wraps more than half a turn over the depth range");
  }
}

MembraneModel::MembraneModel(const SensorGeometry& geom, const MembraneParams& params)
    : geom_(geom), params_(params), baseline_(geom.width, geom.height) {
  geom_.validate();
  params_.validate();

  SeqRng rng(derive_seed(params.pattern_seed, 0xBA5E));
  const double diameter = 2.0 * geom.sensing_radius_mm;
  const SmoothField hue(rng, params.hue_variation_deg, diameter);
  const SmoothField sat(rng, params.saturation_variation, diameter);
  const SmoothField val(rng, params.value_variation, diameter);

  for (int row = 0; row < geom.height; ++row) {
    const double y = geom.y_mm(row);
    for (int col = 0; col < geom.width; ++col) {
      const double x = geom.x_mm(col);
      Hsv& px = baseline_.at(col, row);
      px.h = wrap_hue(params.base_hue_deg + hue(x, y));
      px.s = std::clamp(params.base_saturation + sat(x, y), 0.0, 1.0);
      px.v = std::clamp(params.base_value + val(x, y), 0.0, 1.0);
    }
  }

  const CounterRng speckle_rng(params.pattern_seed, kSpeckleStream);
  speckle_.resize(baseline_.pixel_count());
  for (std::size_t i = 0; i < speckle_.size(); ++i) {
    speckle_[i] = static_cast<float>(speckle_rng.normal(i));
  }
}

Hsv MembraneModel::shifted_colour(std::size_t pixel, double depth_mm) const {
  const Hsv& base = baseline_[pixel];
  if (depth_mm == 0.0) return base;
  return {wrap_hue(base.h + params_.hue_gain_deg_per_mm * depth_mm),
          std::clamp(base.s + params_.saturation_gain_per_mm * depth_mm, 0.0, 1.0),
          std::clamp(base.v + params_.value_gain_per_mm * depth_mm, 0.0, 1.0)};
}

PhantomConfig PhantomConfig::with_tissue(const TissueParams& tissue) {
  PhantomConfig cfg;
  cfg.tissue_stiffness = tissue.tissue_stiffness;
  cfg.tumor_stiffness_boost = tissue.tumor_stiffness_boost;
  cfg.attenuation_length_mm = tissue.attenuation_length_mm;
  return cfg;
}

void PhantomConfig::validate() const {
  require_positive(applied_mass_g, "applied mass");
  require_positive(tissue_stiffness, "tissue stiffness");
  require_positive(attenuation_length_mm, "attenuation length");
  if (!tumor_present) return;
  require_positive(tumor_stiffness_boost, "tumour stiffness boost");
  if (ball_diameter_mm < 2.0 || ball_diameter_mm > 10.0) {
    throw std::invalid_argument("ball diameter must lie in [2, 10] mm");
  }
  if (burial_depth_mm < 1.0 || burial_depth_mm > 7.0) {
    throw std::invalid_argument("burial depth must lie in [1, 7] mm");
  }
  if (!std::isfinite(offset_x_mm) || !std::isfinite(offset_y_mm)) {
    throw std::invalid_argument("lateral offset must be finite");
  }
}

ScalarField stiffness_field(const PhantomConfig& cfg, const SensorGeometry& geom) {
  cfg.validate();
  geom.validate();
  ScalarField field{geom.width, geom.height,
                    std::vector<double>(static_cast<std::size_t>(geom.width) * geom.height,
                                        cfg.tissue_stiffness)};
  if (!cfg.tumor_present) return field;

  const double s = cfg.ball_diameter_mm / (2.0 * std::numbers::sqrt2);
  const double peak =
      cfg.tumor_stiffness_boost * std::exp(-cfg.burial_depth_mm / cfg.attenuation_length_mm);
  for (int row = 0; row < geom.height; ++row) {
    const double dy = geom.y_mm(row) - cfg.offset_y_mm;
    for (int col = 0; col < geom.width; ++col) {
      const double dx = geom.x_mm(col) - cfg.offset_x_mm;
      const double r2 = dx * dx + dy * dy;
      field.values[static_cast<std::size_t>(row) * geom.width + col] +=
          peak * std::exp(-r2 / (2.0 * s * s));
    }
  }
  return field;
}

ContactSolution contact_solve(const PhantomConfig& cfg, const SensorGeometry& geom,
                              const MembraneModel& model) {
  require_same_size(geom.width, geom.height, model.geometry().width, model.geometry().height,
                    "contact_solve");
  const ScalarField k = stiffness_field(cfg, geom);
  const auto mask = geom.disc_mask();
  const double area = geom.pixel_area_mm2();

  double stiffness_integral = 0.0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) stiffness_integral += k.values[i] * area;
  }
  if (!(stiffness_integral > 0.0) || !std::isfinite(stiffness_integral)) {
    throw DegenerateFoundation("degenerate foundation: stiffness integral is not positive");
  }

  ContactSolution sol;
  sol.applied_force_n = cfg.applied_force_n();
  sol.rigid_displacement_mm = sol.applied_force_n / stiffness_integral;
  sol.pressure = {geom.width, geom.height, std::vector<double>(mask.size(), 0.0)};
  sol.deformation = DeformationMap(geom);

  const double k_m = model.stiffness();
  const double limit = model.max_depth();
  auto depths = sol.deformation.depths();
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    const double p = k.values[i] * sol.rigid_displacement_mm;
    sol.pressure.values[i] = p;
    depths[i] = static_cast<float>(std::clamp(p / k_m, 0.0, limit));
  }
  return sol;
}

double sphere_cap_depth(double r_mm, double press_depth_mm, double sphere_radius_mm) {
  const double r2 = r_mm * r_mm;
  const double R = sphere_radius_mm;
  if (r2 >= R * R) return 0.0;
  return std::max(0.0, press_depth_mm - R + std::sqrt(R * R - r2));
}

DeformationMap sphere_press_truth(double press_depth_mm, double sphere_radius_mm,
                                  const SensorGeometry& geom, double max_depth_mm,
                                  double center_x_mm, double center_y_mm) {
  geom.validate();
  if (!(sphere_radius_mm > 0.0)) throw std::invalid_argument("sphere radius must be positive");
  if (!(press_depth_mm > 0.0)) throw std::invalid_argument("press depth must be positive");
  if (press_depth_mm > sphere_radius_mm) {
    throw std::invalid_argument("press depth exceeds sphere radius");
  }
  if (press_depth_mm > max_depth_mm) {
    throw std::invalid_argument("press depth exceeds the membrane depth limit");
  }
  DeformationMap map(geom);
  for (int row = 0; row < geom.height; ++row) {
    const double dy = geom.y_mm(row) - center_y_mm;
    for (int col = 0; col < geom.width; ++col) {
      if (!map.masked(col, row)) continue;
      const double dx = geom.x_mm(col) - center_x_mm;
      map.depth(col, row) = static_cast<float>(
          sphere_cap_depth(std::sqrt(dx * dx + dy * dy), press_depth_mm, sphere_radius_mm));
    }
  }
  return map;
}

HsvImage render_hsv(const DeformationMap& dmap, const MembraneModel& model) {
  const auto& base = model.baseline();
  require_same_size(dmap.width(), dmap.height(), base.width(), base.height(), "render_reading");
  HsvImage out(base.width(), base.height());
  const auto depths = dmap.depths();
  for (std::size_t i = 0; i < out.pixel_count(); ++i) {
    out[i] = model.shifted_colour(i, depths[i]);
  }
  return out;
}

RgbImage render_reading(const DeformationMap& dmap, const MembraneModel& model,
                        std::uint64_t seed) {
  const HsvImage hsv = render_hsv(dmap, model);
  const double sigma = model.params().noise_std;
  const double speckle = model.params().speckle_amplitude;
  const auto& pattern = model.speckle();
  const CounterRng noise(seed, kSensorNoiseStream);

  RgbImage out(hsv.width(), hsv.height());
  auto bytes = out.bytes();
  for (std::size_t i = 0; i < hsv.pixel_count(); ++i) {
    const auto unit = hsv_to_rgb_unit(hsv[i]);
    const double gain = 1.0 + speckle * pattern[i];
    for (std::size_t c = 0; c < 3; ++c) {
      double value = unit[c] * 255.0;
      if (speckle != 0.0) value *= gain;
      if (sigma != 0.0) value += sigma * noise.normal(3 * i + c);
      bytes[3 * i + c] = quantize_channel(value);
    }
  }
  return out;
}

}  // namespace palpa
