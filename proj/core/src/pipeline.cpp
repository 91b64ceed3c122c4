#include "palpa/pipeline.hpp"

#include "palpa/random.hpp"

namespace palpa {

CalibrationRun calibrate(const SimConfig& sim, std::uint64_t seed) {
  const MembraneModel membrane(sim.geometry, sim.membrane);
  const CalibrationRows rows = build_calib_dataset(sim.calibration, membrane, derive_seed(seed, 0));
  TrainConfig train = sim.training;
  train.seed = derive_seed(seed, 1);
  CalibrationRun run;
  run.rows = rows.size();
  run.model = train_mlp(rows, train, &run.report);
  run.model.max_depth_mm = sim.membrane.max_depth_mm;
  return run;
}

}  // namespace palpa
