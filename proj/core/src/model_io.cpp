#include <bit>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "palpa/base64.hpp"
#include "palpa/calibration.hpp"
#include "palpa/image_io.hpp"

namespace palpa {

namespace {

using nlohmann::json;

constexpr int kCalibrationFormatVersion = 1;
constexpr char kCalibrationFormat[] = "palpa-calibration";

std::string pack_floats(const float* data, std::size_t n) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(4 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto bits = std::bit_cast<std::uint32_t>(data[i]);
    for (int b = 0; b < 4; ++b) bytes.push_back(static_cast<std::uint8_t>(bits >> (8 * b)));
  }
  return base64_encode(bytes);
}

std::vector<float> unpack_floats(const std::string& text, std::size_t expected) {
  const auto bytes = base64_decode(text);
  if (bytes.size() != 4 * expected) {
    throw std::invalid_argument("weight blob holds " + std::to_string(bytes.size()) +
                                " bytes, expected " + std::to_string(4 * expected));
  }
  std::vector<float> out(expected);
  for (std::size_t i = 0; i < expected; ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(bytes[4 * i + b]) << (8 * b);
    out[i] = std::bit_cast<float>(bits);
  }
  return out;
}

}  // namespace

std::string calibration_model_to_json(const CalibrationModel& model) {
  model.validate();
  json doc;
  doc["format"] = kCalibrationFormat;
  doc["version"] = kCalibrationFormatVersion;
  doc["layer_sizes"] = mlp::kLayerSizes;
  doc["activation"] = "tanh";
  doc["input_features"] = {"dH_deg", "dS", "dV", "u", "v"};
  doc["output_unit"] = "mm";
  doc["max_depth_mm"] = model.max_depth_mm;
  doc["input_shift"] = pack_floats(model.input_shift.data(), model.input_shift.size());
  doc["input_scale"] = pack_floats(model.input_scale.data(), model.input_scale.size());
  json layers = json::array();
  for (int l = 0; l < mlp::kLayers; ++l) {
    // row-major on disk regardless of Eigen's storage order
    const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> w =
        model.net.weights[l];
    layers.push_back({{"rows", w.rows()},
                      {"cols", w.cols()},
                      {"weights", pack_floats(w.data(), static_cast<std::size_t>(w.size()))},
                      {"biases", pack_floats(model.net.biases[l].data(),
                                             static_cast<std::size_t>(model.net.biases[l].size()))}});
  }
  doc["layers"] = std::move(layers);
  return doc.dump(2) + "\n";
}

CalibrationModel calibration_model_from_json(const std::string& text) {
  CalibrationModel model;
  try {
    const json doc = json::parse(text);
    if (doc.at("format").get<std::string>() != kCalibrationFormat) {
      throw std::invalid_argument("not a calibration model file");
    }
    if (doc.at("version").get<int>() != kCalibrationFormatVersion) {
      throw std::invalid_argument("unsupported calibration model version " +
                                  doc.at("version").dump());
    }
    if (doc.at("layer_sizes").get<std::vector<int>>() !=
        std::vector<int>(mlp::kLayerSizes.begin(), mlp::kLayerSizes.end())) {
      throw std::invalid_argument("calibration model layer sizes must be 5-32-32-32-1");
    }
    model.max_depth_mm = doc.at("max_depth_mm").get<double>();
    const auto shift = unpack_floats(doc.at("input_shift").get<std::string>(), mlp::kInputs);
    const auto scale = unpack_floats(doc.at("input_scale").get<std::string>(), mlp::kInputs);
    std::copy(shift.begin(), shift.end(), model.input_shift.begin());
    std::copy(scale.begin(), scale.end(), model.input_scale.begin());
    const auto& layers = doc.at("layers");
    if (!layers.is_array() || layers.size() != mlp::kLayers) {
      throw std::invalid_argument("calibration model must have 4 weight layers");
    }
    for (int l = 0; l < mlp::kLayers; ++l) {
      const auto& layer = layers[static_cast<std::size_t>(l)];
      const int rows = layer.at("rows").get<int>();
      const int cols = layer.at("cols").get<int>();
      if (rows != mlp::kLayerSizes[l + 1] || cols != mlp::kLayerSizes[l]) {
        throw std::invalid_argument("layer " + std::to_string(l) + " has wrong shape");
      }
      const auto w = unpack_floats(layer.at("weights").get<std::string>(),
                                   static_cast<std::size_t>(rows) * cols);
      const auto b = unpack_floats(layer.at("biases").get<std::string>(), static_cast<std::size_t>(rows));
      model.net.weights[l] =
          Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
              w.data(), rows, cols);
      model.net.biases[l] = Eigen::Map<const Eigen::VectorXf>(b.data(), rows);
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed calibration model: ") + e.what());
  }
  model.validate();
  return model;
}

void save_calibration_model(const std::filesystem::path& path, const CalibrationModel& model) {
  const std::string text = calibration_model_to_json(model);
  write_file_bytes(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

CalibrationModel load_calibration_model(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return calibration_model_from_json(std::string(bytes.begin(), bytes.end()));
}

}  // namespace palpa
