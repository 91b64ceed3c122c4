#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "palpa/color.hpp"
#include "palpa/random.hpp"

using namespace palpa;

TEST_CASE("rgb_to_hsv reference pixels") {
  auto red = rgb_to_hsv(Rgb{255, 0, 0});
  CHECK(red.h == 0.0);
  CHECK(red.s == 1.0);
  CHECK(red.v == 1.0);

  auto black = rgb_to_hsv(Rgb{0, 0, 0});
  CHECK(black.h == 0.0);
  CHECK(black.s == 0.0);
  CHECK(black.v == 0.0);

  auto grey = rgb_to_hsv(Rgb{128, 128, 128});
  CHECK(grey.h == 0.0);
  CHECK(grey.s == 0.0);
  CHECK(grey.v == doctest::Approx(128.0 / 255.0).epsilon(1e-15));
}

TEST_CASE("hsv_to_rgb reference pixels") {
  CHECK(hsv_to_rgb(Hsv{0, 1, 1}) == Rgb{255, 0, 0});
  CHECK(hsv_to_rgb(Hsv{120, 1, 1}) == Rgb{0, 255, 0});
  CHECK(hsv_to_rgb(Hsv{240, 1, 1}) == Rgb{0, 0, 255});
  CHECK(hsv_to_rgb(Hsv{360, 1, 1}) == Rgb{255, 0, 0});
}

TEST_CASE("rgb -> hsv -> rgb is the identity on the 17^3 lattice") {
  const auto axis = oracle::lattice17();
  int checked = 0;
  for (int r : axis) {
    for (int g : axis) {
      for (int b : axis) {
        const Rgb px{static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g), static_cast<std::uint8_t>(b)};
        REQUIRE(hsv_to_rgb(rgb_to_hsv(px)) == px);
        ++checked;
      }
    }
  }
  CHECK(checked == 4913);
}

#ifdef PALPA_LONG_TESTS
TEST_CASE("rgb -> hsv -> rgb is the identity on every 8-bit triple") {
  for (int r = 0; r < 256; ++r) {
    for (int g = 0; g < 256; ++g) {
      for (int b = 0; b < 256; ++b) {
        const Rgb px{static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g), static_cast<std::uint8_t>(b)};
        REQUIRE(hsv_to_rgb(rgb_to_hsv(px)) == px);
      }
    }
  }
}
#endif

TEST_CASE("hsv ranges") {
  SeqRng rng(3);
  for (int i = 0; i < 5000; ++i) {
    const Rgb px{static_cast<std::uint8_t>(rng.below(256)), static_cast<std::uint8_t>(rng.below(256)),
                 static_cast<std::uint8_t>(rng.below(256))};
    const Hsv h = rgb_to_hsv(px);
    REQUIRE(h.h >= 0.0);
    REQUIRE(h.h < 360.0);
    REQUIRE(h.s >= 0.0);
    REQUIRE(h.s <= 1.0);
    REQUIRE(h.v >= 0.0);
    REQUIRE(h.v <= 1.0);
  }
}

TEST_CASE("hue_delta wraps to the short arc") {
  CHECK(hue_delta(10, 350) == doctest::Approx(20.0));
  CHECK(hue_delta(350, 10) == doctest::Approx(-20.0));
  CHECK(hue_delta(180, 0) == 180.0);
  CHECK(hue_delta(0, 180) == 180.0);
  CHECK(hue_delta(42, 42) == 0.0);
}

TEST_CASE("hue_delta is antisymmetric and bounded") {
  SeqRng rng(11);
  for (int i = 0; i < 10000; ++i) {
    const double a = rng.uniform(0, 360);
    const double b = rng.uniform(0, 360);
    const double d = hue_delta(a, b);
    REQUIRE(std::abs(d) <= 180.0);
    if (std::abs(std::abs(d) - 180.0) > 1e-9) REQUIRE(hue_delta(b, a) == doctest::Approx(-d).epsilon(1e-12));
  }
}

TEST_CASE("quantize_channel rounds half up and clamps") {
  CHECK(quantize_channel(127.5) == 128);
  CHECK(quantize_channel(127.4999) == 127);
  CHECK(quantize_channel(-3.0) == 0);
  CHECK(quantize_channel(255.6) == 255);
  CHECK(wrap_hue(-30.0) == doctest::Approx(330.0));
  CHECK(wrap_hue(725.0) == doctest::Approx(5.0));
}
