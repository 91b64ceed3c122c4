#include "fixtures.hpp"

#include "palpa/pipeline.hpp"

namespace fixture {

const palpa::MembraneModel& membrane() {
  static const palpa::MembraneModel m(palpa::SensorGeometry{}, palpa::MembraneParams{});
  return m;
}

palpa::MembraneModel quiet_membrane() {
  palpa::MembraneParams p;
  p.noise_std = 0.0;
  p.speckle_amplitude = 0.0;
  return {palpa::SensorGeometry{}, p};
}

const palpa::CalibrationModel& small_model() {
  static const palpa::CalibrationModel model = [] {
    palpa::CalibrationSetup setup;
    setup.captures = 8;
    palpa::TrainConfig cfg;
    cfg.epochs = 15;
    cfg.seed = 5;
    auto m = palpa::train_mlp(palpa::build_calib_dataset(setup, membrane(), 99), cfg);
    m.max_depth_mm = palpa::kDefaultMaxDepth;
    return m;
  }();
  return model;
}

const palpa::CalibrationModel& reference_model() {
  static const palpa::CalibrationModel model = palpa::calibrate(palpa::SimConfig{}, 0).model;
  return model;
}

}  // namespace fixture
