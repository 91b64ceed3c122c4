#include "palpa/imprint.hpp"

#include <cmath>
#include <stdexcept>

#include "palpa/color.hpp"

namespace palpa {

void ImprintParams::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("alpha must be positive");
  if (!std::isfinite(beta)) throw std::invalid_argument("beta must be finite");
}

RgbImage augmented_imprint(const RgbImage& reference, const RgbImage& contact,
                           const ImprintParams& params) {
  params.validate();
  require_same_size(reference.width(), reference.height(), contact.width(), contact.height(),
                    "augmented_imprint");
  RgbImage out(reference.width(), reference.height());
  const auto ref = reference.bytes();
  const auto cur = contact.bytes();
  auto dst = out.bytes();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    const double diff = static_cast<double>(cur[i]) - static_cast<double>(ref[i]);
    dst[i] = quantize_channel(params.alpha * diff + params.beta);
  }
  return out;
}

ColorDeltaField::ColorDeltaField(int width, int height)
    : width_(width), height_(height), cells_(static_cast<std::size_t>(width) * height) {}

ColorDeltaField color_delta(const RgbImage& reference, const RgbImage& contact) {
  require_same_size(reference.width(), reference.height(), contact.width(), contact.height(),
                    "color_delta");
  const int w = reference.width();
  const int h = reference.height();
  ColorDeltaField field(w, h);
  for (int row = 0; row < h; ++row) {
    for (int col = 0; col < w; ++col) {
      const std::size_t i = static_cast<std::size_t>(row) * w + col;
      const Hsv before = rgb_to_hsv(reference[i]);
      const Hsv after = rgb_to_hsv(contact[i]);
      field[i] = {static_cast<float>(hue_delta(after.h, before.h)),
                  static_cast<float>(after.s - before.s), static_cast<float>(after.v - before.v),
                  normalized_coord(col, w), normalized_coord(row, h)};
    }
  }
  return field;
}

}  // namespace palpa
