#include "mdr/range_coder.hpp"

#include <cmath>
#include <map>
#include <random>

#include "doctest.h"
#include "mdr/errors.hpp"

using namespace mdr;

TEST_SUITE("range_coder") {

TEST_CASE("round-trip across stream shapes") {
  std::mt19937_64 rng(13);
  const auto roundtrip = [](const std::vector<int32_t>& v) {
    const auto packed = pack_indices(v);
    return unpack_indices(packed) == v;
  };

  CHECK(roundtrip({}));
  CHECK(roundtrip({0}));
  CHECK(roundtrip({-5, -5, -5, -5}));
  CHECK(roundtrip({7, -3, 0, 0, 1, 2, -3, 7, 7, 7}));

  for (int trial = 0; trial < 50; ++trial) {
    std::uniform_int_distribution<int> len_d(1, 5000);
    std::uniform_int_distribution<int> span_d(1, 40);
    const int len = len_d(rng);
    const int span = span_d(rng);
    std::uniform_int_distribution<int32_t> val(-span, span);
    std::vector<int32_t> v(len);
    for (auto& x : v) x = val(rng);
    CHECK(roundtrip(v));
  }
}

TEST_CASE("large streams trigger count rescaling and still round-trip") {
  std::mt19937_64 rng(29);
  std::vector<int32_t> v(5'000'000);
  std::normal_distribution<double> g(0.0, 2.0);
  for (auto& x : v) x = static_cast<int32_t>(std::lround(g(rng)));
  const auto packed = pack_indices(v);
  CHECK(unpack_indices(packed) == v);
}

TEST_CASE("coded size tracks the empirical entropy") {
  std::mt19937_64 rng(17);
  // Skewed ternary source, H ~ 0.92 bits.
  std::discrete_distribution<int> dist{0.7, 0.2, 0.1};
  const size_t len = 100000;
  std::vector<int32_t> v(len);
  std::map<int32_t, size_t> counts;
  for (auto& x : v) {
    x = dist(rng) - 1;
    ++counts[x];
  }
  double entropy = 0.0;
  for (const auto& [sym, c] : counts) {
    const double p = static_cast<double>(c) / len;
    entropy -= p * std::log2(p);
  }
  const auto packed = pack_indices(v);
  const double bits_per_symbol = 8.0 * packed.size() / len;
  CHECK(bits_per_symbol >= entropy - 1e-3);
  CHECK(bits_per_symbol <= entropy + 0.02);
}

TEST_CASE("constant streams cost almost nothing") {
  std::vector<int32_t> v(10000, 42);
  const auto packed = pack_indices(v);
  CHECK(packed.size() < 32);
  CHECK(unpack_indices(packed) == v);
}

TEST_CASE("corrupt payloads raise instead of crashing") {
  std::vector<int32_t> v{1, 2, 3, 4, 5, 5, 5, 2, 1};
  auto packed = pack_indices(v);
  packed.resize(packed.size() / 2);
  CHECK_THROWS_AS(unpack_indices(packed), Error);
  CHECK_THROWS_AS(unpack_indices(std::vector<uint8_t>{0xFF}), Error);
}

}  // TEST_SUITE
