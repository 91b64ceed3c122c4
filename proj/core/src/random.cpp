#include "palpa/random.hpp"

#include <cmath>
#include <numbers>

namespace palpa {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

double to_unit(std::uint64_t x) { return static_cast<double>(x >> 11) * 0x1.0p-53; }

double box_muller(double u1, double u2) {
  // u1 in (0, 1] keeps the log finite
  return std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace

std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ull;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBull;
  x ^= x >> 31;
  return x;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  return mix64(seed + kGolden * (mix64(tag) | 1));
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(mix64(mix64(seed) ^ (stream * kGolden + 0x632BE59BD9B4E019ull))) {}

std::uint64_t CounterRng::bits(std::uint64_t counter) const {
  return mix64(key_ ^ mix64(counter + kGolden));
}

double CounterRng::uniform(std::uint64_t counter) const { return to_unit(bits(counter)); }

double CounterRng::normal(std::uint64_t counter) const {
  return box_muller(uniform(2 * counter), uniform(2 * counter + 1));
}

std::uint64_t SeqRng::next() {
  state_ += kGolden;
  return mix64(state_);
}

double SeqRng::uniform() { return to_unit(next()); }

double SeqRng::normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  return box_muller(u1, u2);
}

std::uint64_t SeqRng::below(std::uint64_t n) {
  // rejection keeps the draw unbiased
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x;
  do {
    x = next();
  } while (x >= limit);
  return x % n;
}

}  // namespace palpa
