#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "palpa/image.hpp"

namespace palpa {

/// Mean and population standard deviation of in-disc depth, mm.
struct FeatureVector {
  double mu = 0.0;
  double sigma = 0.0;
};

FeatureVector extract_features(const DeformationMap& map);

using ZScores = std::array<double, 2>;

struct Standardizer {
  std::array<double, 2> mean{0.0, 0.0};
  std::array<double, 2> stddev{1.0, 1.0};

  ZScores apply(const FeatureVector& f) const {
    return {(f.mu - mean[0]) / stddev[0], (f.sigma - mean[1]) / stddev[1]};
  }
};

/// Population statistics; throws on < 2 samples or a zero-variance feature.
Standardizer fit_standardizer(std::span<const FeatureVector> features);

enum class Label { no_tumor, tumor };

inline int label_sign(Label l) { return l == Label::tumor ? 1 : -1; }
const char* label_name(Label l);

struct SvmConfig {
  double C = 10.0;
  int max_iterations = 10000;  // passes over the data
  double tolerance = 1e-9;     // projected-gradient gap
};

/// Linear decision function w . z + b in standardized feature space.
struct LinearSvm {
  double w_mu = 0.0;
  double w_sigma = 0.0;
  double bias = 0.0;
  int iterations = 0;
  double hinge_loss = 0.0;
};

/// Minimizes 0.5 (|w|^2 + b^2) + C sum max(0, 1 - y (w . z + b)) by dual
/// coordinate descent in a fixed cyclic order (the bias is a constant feature).
LinearSvm train_svm(std::span<const ZScores> z, std::span<const Label> labels,
                    const SvmConfig& cfg = {});

struct DetectorModel {
  Standardizer standardizer;
  double w_mu = 0.0;
  double w_sigma = 0.0;
  double bias = 0.0;
  double C = 1.0;
  int iterations = 0;
  std::size_t training_samples = 0;

  void validate() const;
};

/// Fits the standardizer on `features`, then the SVM on the standardized set.
DetectorModel train_detector(std::span<const FeatureVector> features,
                             std::span<const Label> labels, const SvmConfig& cfg = {});

double decision_value(const DetectorModel& model, const ZScores& z);
double decision_value(const DetectorModel& model, const FeatureVector& f);
/// Tumour iff the decision value is strictly positive.
Label classify(double value);
inline Label classify(const DetectorModel& model, const FeatureVector& f) {
  return classify(decision_value(model, f));
}

struct EvaluationReport {
  std::size_t true_positive = 0;
  std::size_t false_positive = 0;
  std::size_t true_negative = 0;
  std::size_t false_negative = 0;
  std::vector<double> decision_values;
  std::vector<Label> predicted;

  std::size_t total() const {
    return true_positive + false_positive + true_negative + false_negative;
  }
  double accuracy() const;
};

EvaluationReport evaluate(const DetectorModel& model, std::span<const FeatureVector> features,
                          std::span<const Label> labels);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Stratified split: within each label, a seeded shuffle sends
/// round(n * train_fraction) indices to train. Index lists are sorted.
Split stratified_split(std::span<const Label> labels, double train_fraction, std::uint64_t seed);

std::string detector_model_to_json(const DetectorModel& model);
DetectorModel detector_model_from_json(const std::string& text);
void save_detector_model(const std::filesystem::path& path, const DetectorModel& model);
DetectorModel load_detector_model(const std::filesystem::path& path);

}  // namespace palpa
