#include <benchmark/benchmark.h>

#include <vector>

#include "palpa/calibration.hpp"
#include "palpa/color.hpp"
#include "palpa/config.hpp"
#include "palpa/imprint.hpp"
#include "palpa/phantom.hpp"
#include "palpa/random.hpp"

namespace {

const palpa::MembraneModel& membrane() {
  static const palpa::MembraneModel m(palpa::SensorGeometry{}, palpa::MembraneParams{});
  return m;
}

// Untrained network: forward cost does not depend on the weights.
palpa::CalibrationModel untrained() {
  palpa::CalibrationModel m;
  m.net = palpa::mlp::Params<float>::glorot(1);
  return m;
}

void BM_RgbToHsv(benchmark::State& state) {
  const auto img = palpa::render_reading(palpa::DeformationMap(membrane().geometry()), membrane(), 1);
  for (auto _ : state) benchmark::DoNotOptimize(palpa::rgb_to_hsv(img));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(img.pixel_count()));
}
BENCHMARK(BM_RgbToHsv);

void BM_Imprint(benchmark::State& state) {
  const palpa::DeformationMap flat(membrane().geometry());
  const auto a = palpa::render_reading(flat, membrane(), 1);
  const auto b = palpa::render_reading(flat, membrane(), 2);
  for (auto _ : state) benchmark::DoNotOptimize(palpa::augmented_imprint(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(a.pixel_count()));
}
BENCHMARK(BM_Imprint);

void BM_MlpForwardBatch(benchmark::State& state) {
  const auto model = untrained();
  palpa::SeqRng rng(3);
  std::vector<palpa::CalibFeatures> f(static_cast<std::size_t>(state.range(0)));
  for (auto& x : f) {
    x = {static_cast<float>(rng.uniform(-5, 50)), -0.01f, -0.005f, static_cast<float>(rng.uniform()),
         static_cast<float>(rng.uniform())};
  }
  for (auto _ : state) benchmark::DoNotOptimize(palpa::mlp_forward_batch(model, f));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MlpForwardBatch)->Arg(1024)->Arg(16384);

void BM_Reconstruct(benchmark::State& state) {
  const auto model = untrained();
  const auto& g = membrane().geometry();
  const auto ref = palpa::render_reading(palpa::DeformationMap(g), membrane(), 1);
  const auto cur = palpa::render_reading(palpa::sphere_press_truth(0.3, 4.0, g), membrane(), 2);
  for (auto _ : state) benchmark::DoNotOptimize(palpa::reconstruct(model, ref, cur, g));
}
BENCHMARK(BM_Reconstruct)->Unit(benchmark::kMillisecond);

void BM_RenderReading(benchmark::State& state) {
  const auto truth = palpa::sphere_press_truth(0.3, 4.0, membrane().geometry());
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(palpa::render_reading(truth, membrane(), ++seed));
}
BENCHMARK(BM_RenderReading)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
