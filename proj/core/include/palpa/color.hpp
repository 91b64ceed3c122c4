#pragma once

#include <array>

#include "palpa/image.hpp"

namespace palpa {

/// Hexcone conversion. Achromatic pixels (S = 0) get H = 0.
Hsv rgb_to_hsv(Rgb px);

/// Unquantized inverse conversion; channels in [0, 1].
std::array<double, 3> hsv_to_rgb_unit(const Hsv& px);

/// Inverse hexcone conversion with round-half-up to 8-bit channels.
/// Hue is taken modulo 360; S and V are clamped to [0, 1].
Rgb hsv_to_rgb(const Hsv& px);

HsvImage rgb_to_hsv(const RgbImage& img);
RgbImage hsv_to_rgb(const HsvImage& img);

/// Minimal signed angular difference `after - before` in (-180, 180].
double hue_delta(double h_after, double h_before);

/// Wraps any finite angle into [0, 360).
double wrap_hue(double h);

/// floor(x + 0.5) clamped to [0, 255].
std::uint8_t quantize_channel(double x);

}  // namespace palpa
