#pragma once

#include <cstdint>
#include <vector>

#include <span>

namespace mdr {

// GF(2^8) arithmetic with the primitive polynomial x^8 + x^4 + x^3 + x^2 + 1
// (0x11D), table-driven.
namespace gf256 {

uint8_t mul(uint8_t a, uint8_t b);
uint8_t div(uint8_t a, uint8_t b);  // b != 0
uint8_t inv(uint8_t a);             // a != 0
uint8_t exp(int e);                 // alpha^e, e reduced mod 255
uint8_t log(uint8_t a);             // a != 0

}  // namespace gf256

// Systematic (n, k) MDS erasure code over GF(256), n <= 255: k data shards
// in, n - k parity shards out, any k of the n shards reconstruct the data.
// Shards are equal-length byte vectors, byte positions independent.
class ReedSolomon {
 public:
  ReedSolomon(int n, int k);

  int n() const { return n_; }
  int k() const { return k_; }

  // Appends n - k parity shards to the k data shards.
  std::vector<std::vector<uint8_t>> encode(
      const std::vector<std::vector<uint8_t>>& data) const;

  // Reconstructs all k data shards from any k survivors. `shards` has n
  // entries; missing ones are empty and flagged in `present`.
  std::vector<std::vector<uint8_t>> decode(const std::vector<std::vector<uint8_t>>& shards,
                                           const std::vector<bool>& present) const;

  // Splits a byte stream into k equal data shards (zero-padded), appends
  // parity; shard i goes to node i. Inverse of join_shards.
  std::vector<std::vector<uint8_t>> split_encode(std::span<const uint8_t> stream) const;
  std::vector<uint8_t> join_shards(const std::vector<std::vector<uint8_t>>& data_shards,
                                   size_t stream_len) const;

 private:
  int n_;
  int k_;
  // Encoding matrix rows for parity shards (systematic Vandermonde-derived).
  std::vector<std::vector<uint8_t>> parity_rows_;
};

}  // namespace mdr
