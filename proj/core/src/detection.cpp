#include "palpa/detection.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

#include "palpa/image_io.hpp"
#include "palpa/random.hpp"

namespace palpa {

FeatureVector extract_features(const DeformationMap& map) {
  const auto depths = map.depths();
  const auto mask = map.mask();
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < depths.size(); ++i) {
    if (!mask[i]) continue;
    sum += depths[i];
    ++n;
  }
  if (n == 0) throw std::invalid_argument("cannot extract features: mask is empty");
  const double mu = sum / static_cast<double>(n);
  double sq = 0.0;
  for (std::size_t i = 0; i < depths.size(); ++i) {
    if (!mask[i]) continue;
    const double d = depths[i] - mu;
    sq += d * d;
  }
  return {mu, std::sqrt(sq / static_cast<double>(n))};
}

Standardizer fit_standardizer(std::span<const FeatureVector> features) {
  if (features.size() < 2) throw std::invalid_argument("standardizer needs at least two samples");
  const double n = static_cast<double>(features.size());
  Standardizer s;
  for (const auto& f : features) {
    s.mean[0] += f.mu;
    s.mean[1] += f.sigma;
  }
  s.mean[0] /= n;
  s.mean[1] /= n;
  std::array<double, 2> sq{0.0, 0.0};
  for (const auto& f : features) {
    sq[0] += (f.mu - s.mean[0]) * (f.mu - s.mean[0]);
    sq[1] += (f.sigma - s.mean[1]) * (f.sigma - s.mean[1]);
  }
  for (int k = 0; k < 2; ++k) {
    s.stddev[k] = std::sqrt(sq[k] / n);
    if (!(s.stddev[k] > 0.0)) {
      throw std::invalid_argument(std::string("zero variance in feature ") + (k == 0 ? "mu" : "sigma"));
    }
  }
  return s;
}

const char* label_name(Label l) { return l == Label::tumor ? "tumor" : "no-tumor"; }

LinearSvm train_svm(std::span<const ZScores> z, std::span<const Label> labels,
                    const SvmConfig& cfg) {
  if (z.size() != labels.size() || z.empty()) {
    throw std::invalid_argument("train_svm: features and labels must be non-empty and aligned");
  }
  const bool has_pos = std::ranges::any_of(labels, [](Label l) { return l == Label::tumor; });
  const bool has_neg = std::ranges::any_of(labels, [](Label l) { return l == Label::no_tumor; });
  if (!has_pos || !has_neg) throw std::invalid_argument("train_svm: both classes must be present");
  if (!(cfg.C > 0.0) || cfg.max_iterations < 1 || !(cfg.tolerance > 0.0)) throw std::invalid_argument("train_svm: bad config");

  const std::size_t n = z.size();
  std::vector<std::array<double, 3>> x(n);
  std::vector<double> y(n), alpha(n, 0.0), qii(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = {z[i][0], z[i][1], 1.0};
    y[i] = label_sign(labels[i]);
    qii[i] = x[i][0] * x[i][0] + x[i][1] * x[i][1] + 1.0;
  }
  std::array<double, 3> w{0.0, 0.0, 0.0};
  LinearSvm svm;
  svm.iterations = cfg.max_iterations;
  for (int pass = 1; pass <= cfg.max_iterations; ++pass) {
    double pg_max = -std::numeric_limits<double>::infinity();
    double pg_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      const double g = y[i] * (w[0] * x[i][0] + w[1] * x[i][1] + w[2]) - 1.0;
      double pg = g;
      if (alpha[i] <= 0.0) pg = std::min(g, 0.0);
      else if (alpha[i] >= cfg.C) pg = std::max(g, 0.0);
      pg_max = std::max(pg_max, pg);
      pg_min = std::min(pg_min, pg);
      if (pg == 0.0) continue;
      const double next = std::clamp(alpha[i] - g / qii[i], 0.0, cfg.C);
      const double step = (next - alpha[i]) * y[i];
      alpha[i] = next;
      for (int k = 0; k < 3; ++k) w[k] += step * x[i][k];
    }
    if (pg_max - pg_min < cfg.tolerance) {
      svm.iterations = pass;
      break;
    }
  }
  svm.w_mu = w[0];
  svm.w_sigma = w[1];
  svm.bias = w[2];
  double hinge = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    hinge += std::max(0.0, 1.0 - y[i] * (w[0] * x[i][0] + w[1] * x[i][1] + w[2]));
  }
  svm.hinge_loss = hinge;
  return svm;
}

void DetectorModel::validate() const {
  for (int k = 0; k < 2; ++k) {
    if (!(standardizer.stddev[k] > 0.0) || !std::isfinite(standardizer.mean[k])) {
      throw std::invalid_argument("detector standardizer is invalid");
    }
  }
  if (!std::isfinite(w_mu) || !std::isfinite(w_sigma) || !std::isfinite(bias)) {
    throw std::invalid_argument("detector weights must be finite");
  }
  if (w_mu == 0.0 && w_sigma == 0.0) throw std::invalid_argument("detector weights are both zero");
}

DetectorModel train_detector(std::span<const FeatureVector> features,
                             std::span<const Label> labels, const SvmConfig& cfg) {
  DetectorModel model;
  model.standardizer = fit_standardizer(features);
  std::vector<ZScores> z;
  z.reserve(features.size());
  for (const auto& f : features) z.push_back(model.standardizer.apply(f));
  const LinearSvm svm = train_svm(z, labels, cfg);
  model.w_mu = svm.w_mu;
  model.w_sigma = svm.w_sigma;
  model.bias = svm.bias;
  model.C = cfg.C;
  model.iterations = svm.iterations;
  model.training_samples = features.size();
  model.validate();
  return model;
}

double decision_value(const DetectorModel& model, const ZScores& z) {
  return model.w_mu * z[0] + model.w_sigma * z[1] + model.bias;
}

double decision_value(const DetectorModel& model, const FeatureVector& f) {
  return decision_value(model, model.standardizer.apply(f));
}

Label classify(double value) { return value > 0.0 ? Label::tumor : Label::no_tumor; }

double EvaluationReport::accuracy() const {
  const auto n = total();
  return n == 0 ? 0.0 : static_cast<double>(true_positive + true_negative) / static_cast<double>(n);
}

EvaluationReport evaluate(const DetectorModel& model, std::span<const FeatureVector> features,
                          std::span<const Label> labels) {
  if (features.size() != labels.size()) throw std::invalid_argument("evaluate: size mismatch");
  if (features.empty()) throw std::invalid_argument("evaluate: empty set");
  EvaluationReport report;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const double value = decision_value(model, features[i]);
    const Label predicted = classify(value);
    report.decision_values.push_back(value);
    report.predicted.push_back(predicted);
    if (labels[i] == Label::tumor) {
      ++(predicted == Label::tumor ? report.true_positive : report.false_negative);
    } else {
      ++(predicted == Label::tumor ? report.false_positive : report.true_negative);
    }
  }
  return report;
}

Split stratified_split(std::span<const Label> labels, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction <= 1.0)) {
    throw std::invalid_argument("train fraction must lie in (0, 1]");
  }
  Split split;
  for (Label cls : {Label::tumor, Label::no_tumor}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == cls) idx.push_back(i);
    }
    SeqRng rng(derive_seed(seed, cls == Label::tumor ? 1 : 0));
    for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng.below(i)]);
    const auto n_train = static_cast<std::size_t>(
        std::floor(static_cast<double>(idx.size()) * train_fraction + 0.5));
    split.train.insert(split.train.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    split.test.insert(split.test.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
  }
  std::ranges::sort(split.train);
  std::ranges::sort(split.test);
  return split;
}

namespace {
constexpr char kDetectorFormat[] = "palpa-detector";
constexpr int kDetectorVersion = 1;
}  // namespace

std::string detector_model_to_json(const DetectorModel& model) {
  model.validate();
  nlohmann::json doc;
  doc["format"] = kDetectorFormat;
  doc["version"] = kDetectorVersion;
  doc["features"] = {"mu_mm", "sigma_mm"};
  doc["standardizer"] = {{"mean", model.standardizer.mean}, {"std", model.standardizer.stddev}};
  doc["weights"] = {{"mu", model.w_mu}, {"sigma", model.w_sigma}};
  doc["bias"] = model.bias;
  doc["label_convention"] = "decision_value > 0 => tumor; ties => no-tumor";
  doc["training"] = {{"C", model.C},
                     {"iterations", model.iterations},
                     {"samples", model.training_samples},
                     {"solver", "dual coordinate descent"}};
  return doc.dump(2) + "\n";
}

DetectorModel detector_model_from_json(const std::string& text) {
  DetectorModel model;
  try {
    const auto doc = nlohmann::json::parse(text);
    if (doc.at("format").get<std::string>() != kDetectorFormat) {
      throw std::invalid_argument("not a detector model file");
    }
    if (doc.at("version").get<int>() != kDetectorVersion) {
      throw std::invalid_argument("unsupported detector model version");
    }
    model.standardizer.mean = doc.at("standardizer").at("mean").get<std::array<double, 2>>();
    model.standardizer.stddev = doc.at("standardizer").at("std").get<std::array<double, 2>>();
    model.w_mu = doc.at("weights").at("mu").get<double>();
    model.w_sigma = doc.at("weights").at("sigma").get<double>();
    model.bias = doc.at("bias").get<double>();
    if (doc.contains("training")) {
      const auto& t = doc["training"];
      model.C = t.value("C", 1.0);
      model.iterations = t.value("iterations", 0);
      model.training_samples = t.value("samples", std::size_t{0});
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed detector model: ") + e.what());
  }
  model.validate();
  return model;
}

void save_detector_model(const std::filesystem::path& path, const DetectorModel& model) {
  const std::string text = detector_model_to_json(model);
  write_file_bytes(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

DetectorModel load_detector_model(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return detector_model_from_json(std::string(bytes.begin(), bytes.end()));
}

}  // namespace palpa
