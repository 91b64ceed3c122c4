#include "palpa/image.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace palpa {

namespace {

void check_dims(int width, int height) {
  if (width < 1 || height < 1) {
    throw DimensionError("image dimensions must be positive, got " + std::to_string(width) +
                         "x" + std::to_string(height));
  }
}

}  // namespace

void require_same_size(int w0, int h0, int w1, int h1, const char* what) {
  if (w0 != w1 || h0 != h1) {
    std::ostringstream os;
    os << what << ": dimension mismatch " << w0 << "x" << h0 << " vs " << w1 << "x" << h1;
    throw DimensionError(os.str());
  }
}

RgbImage::RgbImage(int width, int height) : width_(width), height_(height) {
  check_dims(width, height);
  data_.assign(pixel_count() * 3, 0);
}

RgbImage::RgbImage(int width, int height, std::vector<std::uint8_t> interleaved)
    : width_(width), height_(height), data_(std::move(interleaved)) {
  check_dims(width, height);
  if (data_.size() != pixel_count() * 3) {
    throw DimensionError("RGB payload holds " + std::to_string(data_.size()) +
                         " bytes, expected " + std::to_string(pixel_count() * 3));
  }
}

Rgb RgbImage::at(int col, int row) const {
  return (*this)[static_cast<std::size_t>(row) * width_ + col];
}

void RgbImage::set(int col, int row, Rgb px) {
  const std::size_t i = 3 * (static_cast<std::size_t>(row) * width_ + col);
  data_[i] = px.r;
  data_[i + 1] = px.g;
  data_[i + 2] = px.b;
}

HsvImage::HsvImage(int width, int height) : width_(width), height_(height) {
  check_dims(width, height);
  pixels_.resize(static_cast<std::size_t>(width) * height);
}

void SensorGeometry::validate() const {
  check_dims(width, height);
  if (!(sensing_radius_mm > 0.0)) throw std::invalid_argument("sensing radius must be positive");
  if (!(mm_per_pixel > 0.0)) throw std::invalid_argument("mm-per-pixel scale must be positive");
  const double radius_px = sensing_radius_mm / mm_per_pixel;
  if (2.0 * radius_px > std::min(width, height)) {
    throw std::invalid_argument("sensing disc of radius " + std::to_string(radius_px) +
                                " px does not fit in a " + std::to_string(width) + "x" +
                                std::to_string(height) + " image");
  }
}

bool SensorGeometry::inside(int col, int row) const {
  const double x = x_mm(col);
  const double y = y_mm(row);
  return x * x + y * y <= sensing_radius_mm * sensing_radius_mm;
}

std::vector<std::uint8_t> SensorGeometry::disc_mask() const {
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(width) * height, 0);
  for (int row = 0; row < height; ++row) {
    for (int col = 0; col < width; ++col) {
      mask[static_cast<std::size_t>(row) * width + col] = inside(col, row) ? 1 : 0;
    }
  }
  return mask;
}

std::size_t SensorGeometry::disc_pixel_count() const {
  const auto mask = disc_mask();
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

DeformationMap::DeformationMap(int width, int height) : width_(width), height_(height) {
  check_dims(width, height);
  depths_.assign(static_cast<std::size_t>(width) * height, 0.0f);
  mask_.assign(depths_.size(), 0);
}

DeformationMap::DeformationMap(const SensorGeometry& geom)
    : DeformationMap(geom.width, geom.height) {
  mask_ = geom.disc_mask();
}

DeformationMap::DeformationMap(int width, int height, std::vector<float> depths,
                               std::vector<std::uint8_t> mask)
    : width_(width), height_(height), depths_(std::move(depths)), mask_(std::move(mask)) {
  check_dims(width, height);
  const std::size_t n = static_cast<std::size_t>(width) * height;
  if (depths_.size() != n || mask_.size() != n) {
    throw DimensionError("deformation map payload does not match " + std::to_string(width) +
                         "x" + std::to_string(height));
  }
}

std::size_t DeformationMap::masked_count() const {
  return static_cast<std::size_t>(
      std::count_if(mask_.begin(), mask_.end(), [](std::uint8_t m) { return m != 0; }));
}

std::string check_deformation_map(const DeformationMap& map, double max_depth) {
  const auto depths = map.depths();
  const auto mask = map.mask();
  for (std::size_t i = 0; i < depths.size(); ++i) {
    const float d = depths[i];
    if (!std::isfinite(d) || d < 0.0f) {
      return "pixel " + std::to_string(i) + " has invalid depth " + std::to_string(d);
    }
    if (mask[i] > 1) return "pixel " + std::to_string(i) + " has non-boolean mask value";
    if (mask[i] && d > max_depth) {
      return "pixel " + std::to_string(i) + " depth " + std::to_string(d) +
             " exceeds limit " + std::to_string(max_depth);
    }
  }
  return {};
}

}  // namespace palpa
