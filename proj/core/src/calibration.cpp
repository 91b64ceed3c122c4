#include "palpa/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "palpa/random.hpp"

namespace palpa {

void CalibrationRows::append(const CalibrationRows& other) {
  features.insert(features.end(), other.features.begin(), other.features.end());
  depths_mm.insert(depths_mm.end(), other.depths_mm.begin(), other.depths_mm.end());
}

void CalibrationModel::validate() const {
  for (int l = 0; l < mlp::kLayers; ++l) {
    if (net.weights[l].rows() != mlp::kLayerSizes[l + 1] ||
        net.weights[l].cols() != mlp::kLayerSizes[l] ||
        net.biases[l].size() != mlp::kLayerSizes[l + 1]) {
      throw std::invalid_argument("calibration model layer shapes must be 5-32-32-32-1");
    }
  }
  if (!net.all_finite()) throw std::invalid_argument("calibration model has non-finite weights");
  for (int i = 0; i < mlp::kInputs; ++i) {
    if (!std::isfinite(input_shift[i]) || !(input_scale[i] > 0.0f) ||
        !std::isfinite(input_scale[i])) {
      throw std::invalid_argument("calibration model has invalid input normalization");
    }
  }
  if (!(max_depth_mm > 0.0)) throw std::invalid_argument("calibration model depth limit must be positive");
}

bool operator==(const CalibrationModel& a, const CalibrationModel& b) {
  if (a.input_shift != b.input_shift || a.input_scale != b.input_scale ||
      a.max_depth_mm != b.max_depth_mm) {
    return false;
  }
  for (int l = 0; l < mlp::kLayers; ++l) {
    if (a.net.weights[l] != b.net.weights[l] || a.net.biases[l] != b.net.biases[l]) return false;
  }
  return true;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0) || !(epsilon > 0.0)) {
    throw std::invalid_argument("invalid adaptive-moment constants");
  }
}

CalibrationRows rows_from_capture(const RgbImage& reference, const RgbImage& contact,
                                  const DeformationMap& truth) {
  require_same_size(reference.width(), reference.height(), truth.width(), truth.height(),
                    "rows_from_capture");
  const ColorDeltaField delta = color_delta(reference, contact);
  CalibrationRows rows;
  const auto mask = truth.mask();
  const auto depths = truth.depths();
  const std::size_t n = truth.masked_count();
  rows.features.reserve(n);
  rows.depths_mm.reserve(n);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    rows.features.push_back(to_features(delta[i]));
    rows.depths_mm.push_back(depths[i]);
  }
  return rows;
}

CalibrationRows build_calib_dataset(const CalibrationSetup& setup, const MembraneModel& model,
                                    std::uint64_t seed) {
  if (setup.captures < 1) throw std::invalid_argument("at least one calibration capture is required");
  const SensorGeometry& geom = model.geometry();
  const double limit = model.max_depth();
  SeqRng rng(derive_seed(seed, 0xCA1));
  CalibrationRows rows;
  for (int c = 0; c < setup.captures; ++c) {
    // (0, D_max]: 1 - U with U in [0, 1)
    const double press = limit * (1.0 - rng.uniform());
    const double r = setup.center_spread * geom.sensing_radius_mm * std::sqrt(rng.uniform());
    const double theta = 2.0 * std::numbers::pi * rng.uniform();
    const DeformationMap truth =
        sphere_press_truth(std::min(press, setup.sphere_radius_mm), setup.sphere_radius_mm, geom,
                           limit, r * std::cos(theta), r * std::sin(theta));
    const auto capture_seed = derive_seed(seed, static_cast<std::uint64_t>(c) + 1);
    const RgbImage reference = render_reading(DeformationMap(geom), model, derive_seed(capture_seed, 0));
    const RgbImage contact = render_reading(truth, model, derive_seed(capture_seed, 1));
    rows.append(rows_from_capture(reference, contact, truth));
  }
  return rows;
}

namespace {

struct Adam {
  mlp::Params<float> m = mlp::Params<float>::zeros();
  mlp::Params<float> v = mlp::Params<float>::zeros();
  std::size_t t = 0;

  void step(mlp::Params<float>& net, const mlp::Params<float>& grad, const TrainConfig& cfg) {
    ++t;
    const float b1 = static_cast<float>(cfg.beta1);
    const float b2 = static_cast<float>(cfg.beta2);
    const float c1 = static_cast<float>(1.0 - std::pow(cfg.beta1, static_cast<double>(t)));
    const float c2 = static_cast<float>(1.0 - std::pow(cfg.beta2, static_cast<double>(t)));
    const float lr = static_cast<float>(cfg.learning_rate);
    const float eps = static_cast<float>(cfg.epsilon);
    auto update = [&](auto& param, auto& mom, auto& var, const auto& g) {
      mom.array() = b1 * mom.array() + (1.0f - b1) * g.array();
      var.array() = b2 * var.array() + (1.0f - b2) * g.array().square();
      param.array() -= lr * (mom.array() / c1) / ((var.array() / c2).sqrt() + eps);
    };
    for (int l = 0; l < mlp::kLayers; ++l) {
      update(net.weights[l], m.weights[l], v.weights[l], grad.weights[l]);
      update(net.biases[l], m.biases[l], v.biases[l], grad.biases[l]);
    }
  }
};

}  // namespace

mlp::Matrix<float> standardize(const CalibrationModel& model,
                               std::span<const CalibFeatures> features) {
  mlp::Matrix<float> x(mlp::kInputs, static_cast<Eigen::Index>(features.size()));
  for (std::size_t j = 0; j < features.size(); ++j) {
    for (int i = 0; i < mlp::kInputs; ++i) {
      x(i, static_cast<Eigen::Index>(j)) =
          (features[j][i] - model.input_shift[i]) / model.input_scale[i];
    }
  }
  return x;
}

CalibrationModel train_mlp(const CalibrationRows& rows, const TrainConfig& cfg,
                           TrainReport* report) {
  cfg.validate();
  const std::size_t n = rows.size();
  if (n == 0 || rows.depths_mm.size() != n) throw std::invalid_argument("training rows are empty or inconsistent");

  CalibrationModel model;
  std::array<double, mlp::kInputs> mean{}, sq{};
  for (const auto& f : rows.features) {
    for (int i = 0; i < mlp::kInputs; ++i) {
      if (!std::isfinite(f[i])) throw std::invalid_argument("training features must be finite");
      mean[i] += f[i];
    }
  }
  for (auto& m : mean) m /= static_cast<double>(n);
  for (const auto& f : rows.features) {
    for (int i = 0; i < mlp::kInputs; ++i) sq[i] += (f[i] - mean[i]) * (f[i] - mean[i]);
  }
  for (int i = 0; i < mlp::kInputs; ++i) {
    const double sd = std::sqrt(sq[i] / static_cast<double>(n));
    model.input_shift[i] = static_cast<float>(mean[i]);
    model.input_scale[i] = sd > 1e-12 ? static_cast<float>(sd) : 1.0f;
  }

  const mlp::Matrix<float> x = standardize(model, rows.features);
  mlp::RowVector<float> y(static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) y(static_cast<Eigen::Index>(j)) = rows.depths_mm[j];

  model.net = mlp::Params<float>::glorot(derive_seed(cfg.seed, 1));
  // zero output layer: the untrained model predicts no deformation
  model.net.weights[mlp::kLayers - 1].setZero();
  Adam adam;
  SeqRng shuffler(derive_seed(cfg.seed, 2));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  const std::size_t batch = std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size), n);
  mlp::Params<float> grad;
  mlp::Matrix<float> xb(mlp::kInputs, static_cast<Eigen::Index>(batch));
  mlp::RowVector<float> yb(static_cast<Eigen::Index>(batch));

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (batch < n) {
      for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[shuffler.below(i + 1)]);
    }
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t len = std::min(batch, n - start);
      xb.resize(mlp::kInputs, static_cast<Eigen::Index>(len));
      yb.resize(static_cast<Eigen::Index>(len));
      for (std::size_t j = 0; j < len; ++j) {
        const auto src = static_cast<Eigen::Index>(order[start + j]);
        xb.col(static_cast<Eigen::Index>(j)) = x.col(src);
        yb(static_cast<Eigen::Index>(j)) = y(src);
      }
      const float loss = mlp::mse_gradient(model.net, xb, yb, grad);
      if (!std::isfinite(loss)) {
        throw TrainingError("training diverged: non-finite loss at epoch " + std::to_string(epoch) +
                            ", step " + std::to_string(adam.t));
      }
      loss_sum += static_cast<double>(loss) * static_cast<double>(len);
      adam.step(model.net, grad, cfg);
    }
    if (report) report->epoch_loss.push_back(loss_sum / static_cast<double>(n));
  }
  if (report) report->steps = adam.t;
  if (!model.net.all_finite()) throw TrainingError("training produced non-finite weights");
  return model;
}

std::vector<float> mlp_forward_batch(const CalibrationModel& model,
                                     std::span<const CalibFeatures> features) {
  if (features.empty()) return {};
  const mlp::RowVector<float> out = mlp::forward(model.net, standardize(model, features));
  return {out.data(), out.data() + out.size()};
}

float mlp_forward(const CalibrationModel& model, const CalibFeatures& features) {
  return mlp_forward_batch(model, std::span<const CalibFeatures>(&features, 1)).front();
}

DeformationMap reconstruct(const CalibrationModel& model, const RgbImage& reference,
                           const RgbImage& contact, const SensorGeometry& geom) {
  require_same_size(reference.width(), reference.height(), geom.width, geom.height, "reconstruct");
  const ColorDeltaField delta = color_delta(reference, contact);
  DeformationMap map(geom);
  const auto mask = map.mask();

  std::vector<CalibFeatures> features;
  std::vector<std::size_t> where;
  features.reserve(map.masked_count());
  where.reserve(map.masked_count());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    features.push_back(to_features(delta[i]));
    where.push_back(i);
  }
  const std::vector<float> raw = mlp_forward_batch(model, features);
  auto depths = map.depths();
  const float limit = static_cast<float>(model.max_depth_mm);
  for (std::size_t j = 0; j < raw.size(); ++j) depths[where[j]] = std::clamp(raw[j], 0.0f, limit);
  return map;
}

}  // namespace palpa
