#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace mdr {

// Byte-oriented carry-handling range coder (static models supplied by the
// caller as cumulative frequency tables).
class RangeEncoder {
 public:
  explicit RangeEncoder(std::vector<uint8_t>& out) : out_(out) {}

  void encode(uint32_t cum, uint32_t freq, uint32_t total);
  void flush();

 private:
  void shift_low();

  std::vector<uint8_t>& out_;
  uint64_t low_ = 0;
  uint32_t range_ = 0xFFFFFFFFu;
  uint8_t cache_ = 0;
  uint64_t cache_size_ = 1;
};

class RangeDecoder {
 public:
  // Advances `pos` as bytes are consumed.
  RangeDecoder(std::span<const uint8_t> bytes, size_t& pos);

  uint32_t decode_freq(uint32_t total);
  void decode_update(uint32_t cum, uint32_t freq);

 private:
  uint8_t next_byte();

  std::span<const uint8_t> bytes_;
  size_t& pos_;
  uint32_t code_ = 0;
  uint32_t range_ = 0xFFFFFFFFu;
};

// Lossless coder for integer index streams with a self-describing header
// (offset and per-symbol counts) followed by the range-coded payload.
// Output length tracks the empirical entropy of the stream.
std::vector<uint8_t> pack_indices(std::span<const int32_t> indices);

// Inverse of pack_indices; throws Error on a corrupt stream.
std::vector<int32_t> unpack_indices(std::span<const uint8_t> bytes);

}  // namespace mdr
