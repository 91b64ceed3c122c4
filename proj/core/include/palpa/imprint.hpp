#pragma once

#include <array>
#include <vector>

#include "palpa/image.hpp"

namespace palpa {

struct ImprintParams {
  double alpha = 5.0;
  double beta = 127.5;
  void validate() const;
};

/// clip(alpha * (contact - reference) + beta, 0, 255) per RGB channel,
/// evaluated in real arithmetic and rounded half-up.
RgbImage augmented_imprint(const RgbImage& reference, const RgbImage& contact,
                           const ImprintParams& params = {});

/// Per-pixel HSV change between two readings plus normalized pixel coordinates.
struct ColorDelta {
  float dh = 0;  // signed degrees
  float ds = 0;
  float dv = 0;
  float u = 0;  // col / (width - 1)
  float v = 0;  // row / (height - 1)
};

class ColorDeltaField {
 public:
  ColorDeltaField(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }
  const ColorDelta& at(int col, int row) const {
    return cells_[static_cast<std::size_t>(row) * width_ + col];
  }
  const ColorDelta& operator[](std::size_t i) const { return cells_[i]; }
  ColorDelta& operator[](std::size_t i) { return cells_[i]; }
  std::size_t size() const { return cells_.size(); }

 private:
  int width_;
  int height_;
  std::vector<ColorDelta> cells_;
};

/// Normalized coordinate of index `i` along an axis of `n` pixels (0 for n == 1).
inline float normalized_coord(int i, int n) {
  return n > 1 ? static_cast<float>(i) / static_cast<float>(n - 1) : 0.0f;
}

ColorDeltaField color_delta(const RgbImage& reference, const RgbImage& contact);

}  // namespace palpa
