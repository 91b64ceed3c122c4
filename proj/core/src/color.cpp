#include "palpa/color.hpp"

#include <algorithm>
#include <cmath>

namespace palpa {

std::uint8_t quantize_channel(double x) {
  const double q = std::floor(x + 0.5);
  return static_cast<std::uint8_t>(std::clamp(q, 0.0, 255.0));
}

double wrap_hue(double h) {
  double w = std::fmod(h, 360.0);
  if (w < 0.0) w += 360.0;
  // fmod of a tiny negative value can round up to exactly 360
  if (w >= 360.0) w = 0.0;
  return w;
}

Hsv rgb_to_hsv(Rgb px) {
  const int r = px.r;
  const int g = px.g;
  const int b = px.b;
  const int hi = std::max({r, g, b});
  const int lo = std::min({r, g, b});
  const int chroma = hi - lo;

  Hsv out;
  out.v = hi / 255.0;
  if (hi == 0 || chroma == 0) return out;
  out.s = static_cast<double>(chroma) / hi;

  double h;
  if (hi == r) {
    h = 60.0 * static_cast<double>(g - b) / chroma;
  } else if (hi == g) {
    h = 60.0 * (2.0 + static_cast<double>(b - r) / chroma);
  } else {
    h = 60.0 * (4.0 + static_cast<double>(r - g) / chroma);
  }
  out.h = wrap_hue(h);
  return out;
}

std::array<double, 3> hsv_to_rgb_unit(const Hsv& px) {
  const double h = wrap_hue(px.h);
  const double s = std::clamp(px.s, 0.0, 1.0);
  const double v = std::clamp(px.v, 0.0, 1.0);

  const double c = v * s;
  const double hp = h / 60.0;
  const int sector = std::min(static_cast<int>(hp), 5);
  const double frac = hp - sector;
  const double lo = v - c;
  // rising edge lo + c*frac, falling edge lo + c*(1-frac)
  const double up = lo + c * frac;
  const double down = lo + c * (1.0 - frac);

  double r = 0, g = 0, b = 0;
  switch (sector) {
    case 0: r = v; g = up; b = lo; break;
    case 1: r = down; g = v; b = lo; break;
    case 2: r = lo; g = v; b = up; break;
    case 3: r = lo; g = down; b = v; break;
    case 4: r = up; g = lo; b = v; break;
    default: r = v; g = lo; b = down; break;
  }
  return {r, g, b};
}

Rgb hsv_to_rgb(const Hsv& px) {
  const auto [r, g, b] = hsv_to_rgb_unit(px);
  return {quantize_channel(r * 255.0), quantize_channel(g * 255.0), quantize_channel(b * 255.0)};
}

HsvImage rgb_to_hsv(const RgbImage& img) {
  HsvImage out(img.width(), img.height());
  for (std::size_t i = 0; i < img.pixel_count(); ++i) out[i] = rgb_to_hsv(img[i]);
  return out;
}

RgbImage hsv_to_rgb(const HsvImage& img) {
  RgbImage out(img.width(), img.height());
  auto bytes = out.bytes();
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    const Rgb px = hsv_to_rgb(img[i]);
    bytes[3 * i] = px.r;
    bytes[3 * i + 1] = px.g;
    bytes[3 * i + 2] = px.b;
  }
  return out;
}

double hue_delta(double h_after, double h_before) {
  double d = std::fmod(h_after - h_before, 360.0);
  if (d > 180.0) d -= 360.0;
  if (d <= -180.0) d += 360.0;
  return d;
}

}  // namespace palpa
