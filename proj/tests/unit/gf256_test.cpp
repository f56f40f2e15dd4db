#include "mdr/gf256.hpp"

#include <random>

#include "doctest.h"
#include "mdr/errors.hpp"

using namespace mdr;

TEST_SUITE("gf256") {

TEST_CASE("field identities") {
  for (int a = 1; a < 256; ++a) {
    const uint8_t x = static_cast<uint8_t>(a);
    CHECK(gf256::mul(x, gf256::inv(x)) == 1);
    CHECK(gf256::div(gf256::mul(x, 7), 7) == x);
    CHECK(gf256::exp(gf256::log(x)) == x);
  }
  CHECK(gf256::mul(0, 123) == 0);
  CHECK_THROWS_AS(gf256::div(1, 0), InvalidParams);
  // Generator check against the fixed primitive polynomial: alpha = 2,
  // alpha^8 = 0x1D.
  CHECK(gf256::exp(1) == 2);
  CHECK(gf256::exp(8) == 0x1D);
}

TEST_CASE("every erasure pattern up to n-k losses decodes") {
  std::mt19937_64 rng(7);
  for (const auto [n, k] : {std::pair{4, 3}, {5, 3}, {3, 2}, {2, 1}, {6, 4}}) {
    ReedSolomon rs(n, k);
    std::vector<std::vector<uint8_t>> data(k, std::vector<uint8_t>(64));
    for (auto& shard : data) {
      for (auto& b : shard) b = static_cast<uint8_t>(rng());
    }
    const auto shards = rs.encode(data);
    REQUIRE(static_cast<int>(shards.size()) == n);
    // Erase every subset of size n-k.
    for (int mask = 0; mask < (1 << n); ++mask) {
      if (__builtin_popcount(mask) != n - k) continue;
      std::vector<std::vector<uint8_t>> got(n);
      std::vector<bool> present(n, false);
      for (int i = 0; i < n; ++i) {
        if (!(mask & (1 << i))) {
          got[i] = shards[i];
          present[i] = true;
        }
      }
      const auto decoded = rs.decode(got, present);
      CHECK(decoded == data);
    }
  }
}

TEST_CASE("single-data-shard code is replication") {
  ReedSolomon rs(3, 1);
  const std::vector<std::vector<uint8_t>> data{{1, 2, 3}};
  const auto shards = rs.encode(data);
  CHECK(shards[0] == data[0]);
  CHECK(shards[1] == data[0]);
  CHECK(shards[2] == data[0]);
}

TEST_CASE("stream split/join round-trip with padding") {
  std::mt19937_64 rng(11);
  ReedSolomon rs(5, 3);
  for (const size_t len : {0u, 1u, 2u, 3u, 64u, 65u, 1000u}) {
    std::vector<uint8_t> stream(len);
    for (auto& b : stream) b = static_cast<uint8_t>(rng());
    const auto shards = rs.split_encode(stream);
    REQUIRE(shards.size() == 5);
    // Reassemble from a non-systematic shard subset.
    std::vector<std::vector<uint8_t>> got(5);
    std::vector<bool> present(5, false);
    for (int i : {0, 2, 4}) {
      got[i] = shards[i];
      present[i] = true;
    }
    const auto data = rs.decode(got, present);
    CHECK(rs.join_shards(data, len) == stream);
  }
}

TEST_CASE("decode with too few shards fails loudly") {
  ReedSolomon rs(4, 3);
  std::vector<std::vector<uint8_t>> got(4);
  std::vector<bool> present(4, false);
  got[0] = {1};
  present[0] = true;
  CHECK_THROWS_AS(rs.decode(got, present), Error);
  CHECK_THROWS_AS(ReedSolomon(300, 2), InvalidParams);
  CHECK_THROWS_AS(ReedSolomon(2, 3), InvalidParams);
}

}  // TEST_SUITE
