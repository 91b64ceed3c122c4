#pragma once

#include <filesystem>
#include <string>

#include "palpa/calibration.hpp"
#include "palpa/characterization.hpp"
#include "palpa/dataset.hpp"
#include "palpa/image.hpp"
#include "palpa/phantom.hpp"

namespace palpa {

/// Library version, e.g. "0.3.0".
const char* version();

/// Every tunable constant of the simulated sensor in one place. The defaults
/// are the reference configuration shipped as configs/reference_sim.json.
struct SimConfig {
  SensorGeometry geometry;
  MembraneParams membrane;
  TissueParams tissue;
  CalibrationSetup calibration;
  TrainConfig training;
  RigConfig rig;

  void validate() const;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// JSON documents. Missing keys keep their defaults; unknown keys are rejected.
std::string to_json(const SimConfig& cfg);
SimConfig sim_config_from_json(const std::string& text);
SimConfig load_sim_config(const std::filesystem::path& path);

std::string to_json(const DatasetSpec& spec);
DatasetSpec dataset_spec_from_json(const std::string& text);

std::string to_json(const PhantomConfig& cfg);
PhantomConfig phantom_config_from_json(const std::string& text, const TissueParams& tissue = {});

std::string read_text_file(const std::filesystem::path& path);

}  // namespace palpa
