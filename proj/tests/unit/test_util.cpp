#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "palpa/base64.hpp"
#include "palpa/random.hpp"

using namespace palpa;

namespace {
std::vector<std::uint8_t> bytes(const std::string& s) { return {s.begin(), s.end()}; }
}  // namespace

TEST_CASE("base64 RFC 4648 vectors") {
  const std::vector<std::pair<std::string, std::string>> cases{
      {"", ""},          {"f", "Zg=="},         {"fo", "Zm8="},        {"foo", "Zm9v"},
      {"foob", "Zm9vYg=="}, {"fooba", "Zm9vYmE="}, {"foobar", "Zm9vYmFy"}};
  for (const auto& [plain, enc] : cases) {
    CHECK(base64_encode(bytes(plain)) == enc);
    CHECK(base64_decode(enc) == bytes(plain));
  }
  CHECK_THROWS(base64_decode("Zm9*"));
  CHECK_THROWS(base64_decode("Zm9"));
  CHECK_THROWS(base64_decode("Z==="));
}

TEST_CASE("base64 round-trips every byte value") {
  std::vector<std::uint8_t> all(256);
  for (int i = 0; i < 256; ++i) all[i] = static_cast<std::uint8_t>(i);
  CHECK(base64_decode(base64_encode(all)) == all);
}

TEST_CASE("counter rng is a pure function of its inputs") {
  const CounterRng a(7, 3), b(7, 3), c(7, 4);
  for (std::uint64_t k = 0; k < 100; ++k) {
    CHECK(a.bits(k) == b.bits(k));
    CHECK(a.normal(k) == b.normal(k));
  }
  int same = 0;
  for (std::uint64_t k = 0; k < 100; ++k) same += a.bits(k) == c.bits(k);
  CHECK(same == 0);
}

TEST_CASE("counter rng moments") {
  const CounterRng r(123, 0);
  const int n = 200000;
  double su = 0, sn = 0, sn2 = 0;
  for (int k = 0; k < n; ++k) {
    const double u = r.uniform(static_cast<std::uint64_t>(k));
    CHECK_UNARY(u >= 0.0);
    CHECK_UNARY(u < 1.0);
    su += u;
    const double z = r.normal(static_cast<std::uint64_t>(k));
    sn += z;
    sn2 += z * z;
  }
  CHECK(su / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(std::abs(sn / n) < 0.01);
  CHECK(sn2 / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("sequential rng") {
  SeqRng a(9), b(9);
  for (int i = 0; i < 50; ++i) CHECK(a.next() == b.next());
  SeqRng c(1);
  std::vector<int> hits(5, 0);
  for (int i = 0; i < 5000; ++i) ++hits[c.below(5)];
  for (int h : hits) CHECK(h > 800);
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  CHECK(derive_seed(5, 5) == derive_seed(5, 5));
}
