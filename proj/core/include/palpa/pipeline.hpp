#pragma once

#include <cstdint>

#include "palpa/calibration.hpp"
#include "palpa/config.hpp"

namespace palpa {

struct CalibrationRun {
  CalibrationModel model;
  TrainReport report;
  std::size_t rows = 0;
};

/// The reference calibration recipe: capture rows with derive_seed(seed, 0),
/// train with derive_seed(seed, 1) and bind the membrane depth limit.
CalibrationRun calibrate(const SimConfig& sim, std::uint64_t seed);

}  // namespace palpa
