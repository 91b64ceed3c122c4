#pragma once

#include "palpa/calibration.hpp"
#include "palpa/config.hpp"

namespace fixture {

// Reduced-size model trained once per test binary; good enough for pipeline
// plumbing, not for accuracy claims.
const palpa::CalibrationModel& small_model();
// Full reference calibration (seed 0); about half a minute on first use.
const palpa::CalibrationModel& reference_model();
const palpa::MembraneModel& membrane();
palpa::MembraneModel quiet_membrane();  // no sensor noise, no speckle

}  // namespace fixture
