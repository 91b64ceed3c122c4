#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace palpa {

/// Default upper bound on membrane indentation, mm.
inline constexpr double kDefaultMaxDepth = 0.5;

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Hue in degrees [0, 360), saturation and value in [0, 1].
struct Hsv {
  double h = 0.0;
  double s = 0.0;
  double v = 0.0;
};

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Row-major 8-bit RGB raster, origin at the top-left pixel.
class RgbImage {
 public:
  RgbImage() = default;
  RgbImage(int width, int height);
  RgbImage(int width, int height, std::vector<std::uint8_t> interleaved);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * height_; }

  Rgb at(int col, int row) const;
  void set(int col, int row, Rgb px);
  Rgb operator[](std::size_t i) const {
    return {data_[3 * i], data_[3 * i + 1], data_[3 * i + 2]};
  }

  std::span<const std::uint8_t> bytes() const { return data_; }
  std::span<std::uint8_t> bytes() { return data_; }

  friend bool operator==(const RgbImage&, const RgbImage&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

class HsvImage {
 public:
  HsvImage() = default;
  HsvImage(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t pixel_count() const { return pixels_.size(); }

  const Hsv& at(int col, int row) const { return pixels_[index(col, row)]; }
  Hsv& at(int col, int row) { return pixels_[index(col, row)]; }
  const Hsv& operator[](std::size_t i) const { return pixels_[i]; }
  Hsv& operator[](std::size_t i) { return pixels_[i]; }

  std::span<const Hsv> pixels() const { return pixels_; }

 private:
  std::size_t index(int col, int row) const {
    return static_cast<std::size_t>(row) * width_ + col;
  }
  int width_ = 0;
  int height_ = 0;
  std::vector<Hsv> pixels_;
};

/// Sensor face geometry. The sensing disc is centred on the image centre.
struct SensorGeometry {
  int width = 320;
  int height = 240;
  double sensing_radius_mm = 3.5;
  double mm_per_pixel = 0.05;

  void validate() const;

  /// Pixel-centre offset from the image centre, mm (x right, y down).
  double x_mm(int col) const { return (col - 0.5 * (width - 1)) * mm_per_pixel; }
  double y_mm(int row) const { return (row - 0.5 * (height - 1)) * mm_per_pixel; }
  bool inside(int col, int row) const;
  double pixel_area_mm2() const { return mm_per_pixel * mm_per_pixel; }

  /// Row-major disc mask, 1 inside the sensing region.
  std::vector<std::uint8_t> disc_mask() const;
  std::size_t disc_pixel_count() const;

  friend bool operator==(const SensorGeometry&, const SensorGeometry&) = default;
};

/// Per-pixel indentation depth in mm plus the sensing-disc mask.
class DeformationMap {
 public:
  DeformationMap() = default;
  DeformationMap(int width, int height);
  /// Zero-depth map whose mask is the disc of `geom`.
  explicit DeformationMap(const SensorGeometry& geom);
  DeformationMap(int width, int height, std::vector<float> depths,
                 std::vector<std::uint8_t> mask);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t pixel_count() const { return depths_.size(); }

  float depth(int col, int row) const { return depths_[index(col, row)]; }
  float& depth(int col, int row) { return depths_[index(col, row)]; }
  bool masked(int col, int row) const { return mask_[index(col, row)] != 0; }

  std::span<const float> depths() const { return depths_; }
  std::span<float> depths() { return depths_; }
  std::span<const std::uint8_t> mask() const { return mask_; }
  std::span<std::uint8_t> mask() { return mask_; }

  std::size_t masked_count() const;

  friend bool operator==(const DeformationMap&, const DeformationMap&) = default;

 private:
  std::size_t index(int col, int row) const {
    return static_cast<std::size_t>(row) * width_ + col;
  }
  int width_ = 0;
  int height_ = 0;
  std::vector<float> depths_;
  std::vector<std::uint8_t> mask_;
};

/// Empty string when `map` satisfies 0 <= depth everywhere and depth <= max_depth
/// inside the mask; otherwise a description of the first violation.
std::string check_deformation_map(const DeformationMap& map,
                                  double max_depth = kDefaultMaxDepth);

void require_same_size(int w0, int h0, int w1, int h1, const char* what);

}  // namespace palpa
