#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "palpa/image.hpp"
#include "palpa/imprint.hpp"
#include "palpa/mlp.hpp"
#include "palpa/phantom.hpp"

namespace palpa {

/// (dH, dS, dV, u, v) for one pixel.
using CalibFeatures = std::array<float, mlp::kInputs>;

inline CalibFeatures to_features(const ColorDelta& d) { return {d.dh, d.ds, d.dv, d.u, d.v}; }

/// Per-pixel supervised rows: colour change and position -> indentation depth.
struct CalibrationRows {
  std::vector<CalibFeatures> features;
  std::vector<float> depths_mm;

  std::size_t size() const { return features.size(); }
  void append(const CalibrationRows& other);
};

/// Per-pixel inverse model. Inputs are standardized with the training-set
/// statistics stored here, so inference needs nothing else.
struct CalibrationModel {
  mlp::Params<float> net = mlp::Params<float>::zeros();
  CalibFeatures input_shift{};
  CalibFeatures input_scale{1, 1, 1, 1, 1};
  double max_depth_mm = kDefaultMaxDepth;

  void validate() const;
  friend bool operator==(const CalibrationModel& a, const CalibrationModel& b);
};

struct TrainConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int epochs = 50;
  int batch_size = 4096;
  std::uint64_t seed = 1;
  void validate() const;
};

struct TrainReport {
  /// Sample-weighted mean of mini-batch losses in each epoch (pre-update values).
  std::vector<double> epoch_loss;
  std::size_t steps = 0;
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Press-capture protocol for the calibration set.
struct CalibrationSetup {
  int captures = 30;
  double sphere_radius_mm = 4.0;
  /// Press centres are drawn uniformly within this fraction of the disc radius.
  double center_spread = 1.0;
};

/// Renders `setup.captures` sphere presses with depths uniform in (0, D_max]
/// and returns one row per in-disc pixel of every capture.
CalibrationRows build_calib_dataset(const CalibrationSetup& setup, const MembraneModel& model,
                                    std::uint64_t seed);

/// Rows from an explicit (reference, contact, truth) triple.
CalibrationRows rows_from_capture(const RgbImage& reference, const RgbImage& contact,
                                  const DeformationMap& truth);

CalibrationModel train_mlp(const CalibrationRows& rows, const TrainConfig& cfg,
                           TrainReport* report = nullptr);

/// Raw network output in mm (unclamped).
float mlp_forward(const CalibrationModel& model, const CalibFeatures& features);
std::vector<float> mlp_forward_batch(const CalibrationModel& model,
                                     std::span<const CalibFeatures> features);

/// Standardized input matrix (5 x N) as fed to the network.
mlp::Matrix<float> standardize(const CalibrationModel& model,
                               std::span<const CalibFeatures> features);

/// Colour delta, per-pixel inference, clamp to [0, D_max], zero outside the disc.
DeformationMap reconstruct(const CalibrationModel& model, const RgbImage& reference,
                           const RgbImage& contact, const SensorGeometry& geom);

/// Anything that turns a reading pair into a deformation map.
class DepthReconstructor {
 public:
  virtual ~DepthReconstructor() = default;
  virtual DeformationMap operator()(const RgbImage& reference, const RgbImage& contact) const = 0;
};

class MlpReconstructor final : public DepthReconstructor {
 public:
  MlpReconstructor(CalibrationModel model, SensorGeometry geom)
      : model_(std::move(model)), geom_(geom) {}
  DeformationMap operator()(const RgbImage& reference, const RgbImage& contact) const override {
    return reconstruct(model_, reference, contact, geom_);
  }
  const CalibrationModel& model() const { return model_; }

 private:
  CalibrationModel model_;
  SensorGeometry geom_;
};

/// Versioned JSON with base64 little-endian float32 weight blobs.
std::string calibration_model_to_json(const CalibrationModel& model);
CalibrationModel calibration_model_from_json(const std::string& text);
void save_calibration_model(const std::filesystem::path& path, const CalibrationModel& model);
CalibrationModel load_calibration_model(const std::filesystem::path& path);

}  // namespace palpa
