#pragma once

#include <cstdint>

namespace palpa {

/// Stateless counter-based generator: every draw is a pure function of
/// (seed, stream, counter), so per-pixel noise does not depend on visitation
/// order or thread count.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t bits(std::uint64_t counter) const;
  /// Uniform in [0, 1) with 53 random bits.
  double uniform(std::uint64_t counter) const;
  /// Standard normal via Box-Muller on two sub-draws of `counter`.
  double normal(std::uint64_t counter) const;

 private:
  std::uint64_t key_;
};

/// Sequential generator for sampling schedules (splitmix64).
class SeqRng {
 public:
  explicit SeqRng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::uint64_t state_;
};

std::uint64_t mix64(std::uint64_t x);

/// Derives an independent seed for a named sub-task.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

}  // namespace palpa
