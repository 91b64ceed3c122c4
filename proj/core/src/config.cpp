#include "palpa/config.hpp"

#include <nlohmann/json.hpp>

#include "palpa/image_io.hpp"

namespace palpa {

namespace {

using nlohmann::json;

// Reads `key` into `field` when present and records that it was consumed.
class Reader {
 public:
  Reader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(path_ + ": expected a JSON object");
  }

  template <typename T>
  Reader& get(const char* key, T& field) {
    seen_.push_back(key);
    if (!obj_.contains(key)) return *this;
    try {
      field = obj_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(path_ + "." + key + ": " + e.what());
    }
    return *this;
  }

  const json* child(const char* key) {
    seen_.push_back(key);
    return obj_.contains(key) ? &obj_.at(key) : nullptr;
  }

  void finish() const {
    for (const auto& [key, value] : obj_.items()) {
      if (std::find(seen_.begin(), seen_.end(), key) == seen_.end()) {
        throw ConfigError(path_ + ": unknown key '" + key + "'");
      }
    }
  }

 private:
  const json& obj_;
  std::string path_;
  std::vector<std::string> seen_;
};

json geometry_json(const SensorGeometry& g) {
  return {{"width", g.width},
          {"height", g.height},
          {"sensing_radius_mm", g.sensing_radius_mm},
          {"mm_per_pixel", g.mm_per_pixel}};
}

void read_geometry(const json& j, SensorGeometry& g) {
  Reader(j, "geometry")
      .get("width", g.width)
      .get("height", g.height)
      .get("sensing_radius_mm", g.sensing_radius_mm)
      .get("mm_per_pixel", g.mm_per_pixel)
      .finish();
}

json membrane_json(const MembraneParams& m) {
  return {{"hue_gain_deg_per_mm", m.hue_gain_deg_per_mm},
          {"saturation_gain_per_mm", m.saturation_gain_per_mm},
          {"value_gain_per_mm", m.value_gain_per_mm},
          {"noise_std", m.noise_std},
          {"speckle_amplitude", m.speckle_amplitude},
          {"stiffness_n_per_mm3", m.stiffness_n_per_mm3},
          {"max_depth_mm", m.max_depth_mm},
          {"pattern_seed", m.pattern_seed},
          {"base_hue_deg", m.base_hue_deg},
          {"hue_variation_deg", m.hue_variation_deg},
          {"base_saturation", m.base_saturation},
          {"saturation_variation", m.saturation_variation},
          {"base_value", m.base_value},
          {"value_variation", m.value_variation}};
}

void read_membrane(const json& j, MembraneParams& m) {
  Reader(j, "membrane")
      .get("hue_gain_deg_per_mm", m.hue_gain_deg_per_mm)
      .get("saturation_gain_per_mm", m.saturation_gain_per_mm)
      .get("value_gain_per_mm", m.value_gain_per_mm)
      .get("noise_std", m.noise_std)
      .get("speckle_amplitude", m.speckle_amplitude)
      .get("stiffness_n_per_mm3", m.stiffness_n_per_mm3)
      .get("max_depth_mm", m.max_depth_mm)
      .get("pattern_seed", m.pattern_seed)
      .get("base_hue_deg", m.base_hue_deg)
      .get("hue_variation_deg", m.hue_variation_deg)
      .get("base_saturation", m.base_saturation)
      .get("saturation_variation", m.saturation_variation)
      .get("base_value", m.base_value)
      .get("value_variation", m.value_variation)
      .finish();
}

json tissue_json(const TissueParams& t) {
  return {{"tissue_stiffness", t.tissue_stiffness},
          {"tumor_stiffness_boost", t.tumor_stiffness_boost},
          {"attenuation_length_mm", t.attenuation_length_mm}};
}

void read_tissue(const json& j, TissueParams& t) {
  Reader(j, "tissue")
      .get("tissue_stiffness", t.tissue_stiffness)
      .get("tumor_stiffness_boost", t.tumor_stiffness_boost)
      .get("attenuation_length_mm", t.attenuation_length_mm)
      .finish();
}

json calibration_json(const CalibrationSetup& c) {
  return {{"captures", c.captures},
          {"sphere_radius_mm", c.sphere_radius_mm},
          {"center_spread", c.center_spread}};
}

void read_calibration(const json& j, CalibrationSetup& c) {
  Reader(j, "calibration")
      .get("captures", c.captures)
      .get("sphere_radius_mm", c.sphere_radius_mm)
      .get("center_spread", c.center_spread)
      .finish();
}

json training_json(const TrainConfig& t) {
  return {{"learning_rate", t.learning_rate}, {"beta1", t.beta1},   {"beta2", t.beta2},
          {"epsilon", t.epsilon},             {"epochs", t.epochs}, {"batch_size", t.batch_size},
          {"seed", t.seed}};
}

void read_training(const json& j, TrainConfig& t) {
  Reader(j, "training")
      .get("learning_rate", t.learning_rate)
      .get("beta1", t.beta1)
      .get("beta2", t.beta2)
      .get("epsilon", t.epsilon)
      .get("epochs", t.epochs)
      .get("batch_size", t.batch_size)
      .get("seed", t.seed)
      .finish();
}

json rig_json(const RigConfig& r) {
  return {{"indenter_radius_mm", r.indenter_radius_mm},
          {"stiffness_n_per_mm3", r.stiffness_n_per_mm3},
          {"full_scale_depth_mm", r.full_scale_depth_mm},
          {"force_step_n", r.force_step_n},
          {"force_max_n", r.force_max_n},
          {"detection_sigmas", r.detection_sigmas},
          {"trials", r.trials},
          {"depth_steps", r.depth_steps},
          {"hysteresis_points", r.hysteresis_points},
          {"smoothing_window", r.smoothing_window},
          {"unloading_lag_mm", r.unloading_lag_mm},
          {"seating_error_mm", r.seating_error_mm},
          {"reading_jitter_mm", r.reading_jitter_mm}};
}

void read_rig(const json& j, RigConfig& r) {
  Reader(j, "rig")
      .get("indenter_radius_mm", r.indenter_radius_mm)
      .get("stiffness_n_per_mm3", r.stiffness_n_per_mm3)
      .get("full_scale_depth_mm", r.full_scale_depth_mm)
      .get("force_step_n", r.force_step_n)
      .get("force_max_n", r.force_max_n)
      .get("detection_sigmas", r.detection_sigmas)
      .get("trials", r.trials)
      .get("depth_steps", r.depth_steps)
      .get("hysteresis_points", r.hysteresis_points)
      .get("smoothing_window", r.smoothing_window)
      .get("unloading_lag_mm", r.unloading_lag_mm)
      .get("seating_error_mm", r.seating_error_mm)
      .get("reading_jitter_mm", r.reading_jitter_mm)
      .finish();
}

json parse(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string(what) + ": invalid JSON: " + e.what());
  }
}

template <typename T>
void read_section(Reader& r, const char* key, T& field, void (*fn)(const json&, T&)) {
  if (const json* j = r.child(key)) fn(*j, field);
}

}  // namespace

const char* version() { return PALPA_VERSION; }

void SimConfig::validate() const {
  geometry.validate();
  membrane.validate();
  training.validate();
  rig.validate();
  if (calibration.captures < 1 || !(calibration.sphere_radius_mm > 0.0)) {
    throw std::invalid_argument("calibration setup needs >= 1 capture and a positive sphere radius");
  }
  if (!(tissue.tissue_stiffness > 0.0) || !(tissue.tumor_stiffness_boost > 0.0) ||
      !(tissue.attenuation_length_mm > 0.0)) {
    throw std::invalid_argument("tissue parameters must be positive");
  }
}

std::string to_json(const SimConfig& cfg) {
  json doc = {{"geometry", geometry_json(cfg.geometry)},
              {"membrane", membrane_json(cfg.membrane)},
              {"tissue", tissue_json(cfg.tissue)},
              {"calibration", calibration_json(cfg.calibration)},
              {"training", training_json(cfg.training)},
              {"rig", rig_json(cfg.rig)}};
  return doc.dump(2) + "\n";
}

SimConfig sim_config_from_json(const std::string& text) {
  const json doc = parse(text, "simulation config");
  SimConfig cfg;
  Reader r(doc, "config");
  read_section(r, "geometry", cfg.geometry, read_geometry);
  read_section(r, "membrane", cfg.membrane, read_membrane);
  read_section(r, "tissue", cfg.tissue, read_tissue);
  read_section(r, "calibration", cfg.calibration, read_calibration);
  read_section(r, "training", cfg.training, read_training);
  read_section(r, "rig", cfg.rig, read_rig);
  r.finish();
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid simulation config: ") + e.what());
  }
  return cfg;
}

std::string read_text_file(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return {bytes.begin(), bytes.end()};
}

SimConfig load_sim_config(const std::filesystem::path& path) {
  return sim_config_from_json(read_text_file(path));
}

std::string to_json(const DatasetSpec& spec) {
  json doc = {{"ball_diameters_mm", spec.ball_diameters_mm},
              {"burial_depths_mm", spec.burial_depths_mm},
              {"presses_per_tumor", spec.presses_per_tumor},
              {"tumor_mass_g", spec.tumor_mass_g},
              {"negative_masses_g", spec.negative_masses_g},
              {"presses_per_negative_mass", spec.presses_per_negative_mass},
              {"max_lateral_offset_mm", spec.max_lateral_offset_mm}};
  return doc.dump(2) + "\n";
}

DatasetSpec dataset_spec_from_json(const std::string& text) {
  const json doc = parse(text, "dataset spec");
  DatasetSpec spec;
  Reader(doc, "dataset")
      .get("ball_diameters_mm", spec.ball_diameters_mm)
      .get("burial_depths_mm", spec.burial_depths_mm)
      .get("presses_per_tumor", spec.presses_per_tumor)
      .get("tumor_mass_g", spec.tumor_mass_g)
      .get("negative_masses_g", spec.negative_masses_g)
      .get("presses_per_negative_mass", spec.presses_per_negative_mass)
      .get("max_lateral_offset_mm", spec.max_lateral_offset_mm)
      .finish();
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid dataset spec: ") + e.what());
  }
  return spec;
}

std::string to_json(const PhantomConfig& cfg) {
  json doc = {{"tumor_present", cfg.tumor_present},
              {"ball_diameter_mm", cfg.ball_diameter_mm},
              {"burial_depth_mm", cfg.burial_depth_mm},
              {"lateral_offset_mm", {cfg.offset_x_mm, cfg.offset_y_mm}},
              {"tissue_stiffness", cfg.tissue_stiffness},
              {"tumor_stiffness_boost", cfg.tumor_stiffness_boost},
              {"attenuation_length_mm", cfg.attenuation_length_mm},
              {"applied_mass_g", cfg.applied_mass_g}};
  return doc.dump(2) + "\n";
}

PhantomConfig phantom_config_from_json(const std::string& text, const TissueParams& tissue) {
  const json doc = parse(text, "phantom config");
  PhantomConfig cfg = PhantomConfig::with_tissue(tissue);
  std::array<double, 2> offset{cfg.offset_x_mm, cfg.offset_y_mm};
  Reader(doc, "phantom")
      .get("tumor_present", cfg.tumor_present)
      .get("ball_diameter_mm", cfg.ball_diameter_mm)
      .get("burial_depth_mm", cfg.burial_depth_mm)
      .get("lateral_offset_mm", offset)
      .get("tissue_stiffness", cfg.tissue_stiffness)
      .get("tumor_stiffness_boost", cfg.tumor_stiffness_boost)
      .get("attenuation_length_mm", cfg.attenuation_length_mm)
      .get("applied_mass_g", cfg.applied_mass_g)
      .finish();
  cfg.offset_x_mm = offset[0];
  cfg.offset_y_mm = offset[1];
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid phantom config: ") + e.what());
  }
  return cfg;
}

}  // namespace palpa
