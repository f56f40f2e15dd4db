#include "mdr/range_coder.hpp"

#include <algorithm>
#include <limits>

#include "mdr/errors.hpp"

namespace mdr {

namespace {

constexpr uint32_t kTopValue = 1u << 24;
constexpr uint32_t kMaxTotal = 1u << 22;

void put_varint(std::vector<uint8_t>& out, uint64_t v) {
  while (v >= 0x80) {
    out.push_back(static_cast<uint8_t>(v) | 0x80);
    v >>= 7;
  }
  out.push_back(static_cast<uint8_t>(v));
}

uint64_t get_varint(std::span<const uint8_t> bytes, size_t& pos) {
  uint64_t v = 0;
  int shift = 0;
  while (true) {
    if (pos >= bytes.size() || shift > 63) throw Error("range coder: truncated varint");
    const uint8_t b = bytes[pos++];
    v |= static_cast<uint64_t>(b & 0x7F) << shift;
    if (!(b & 0x80)) return v;
    shift += 7;
  }
}

uint64_t zigzag(int64_t v) { return (static_cast<uint64_t>(v) << 1) ^ static_cast<uint64_t>(v >> 63); }
int64_t unzigzag(uint64_t v) { return static_cast<int64_t>(v >> 1) ^ -static_cast<int64_t>(v & 1); }

}  // namespace

void RangeEncoder::encode(uint32_t cum, uint32_t freq, uint32_t total) {
  range_ /= total;
  low_ += static_cast<uint64_t>(cum) * range_;
  range_ *= freq;
  while (range_ < kTopValue) {
    shift_low();
    range_ <<= 8;
  }
}

void RangeEncoder::flush() {
  for (int i = 0; i < 5; ++i) shift_low();
}

void RangeEncoder::shift_low() {
  if (static_cast<uint32_t>(low_) < 0xFF000000u || (low_ >> 32) != 0) {
    uint8_t carry = static_cast<uint8_t>(low_ >> 32);
    uint8_t byte = cache_;
    do {
      out_.push_back(static_cast<uint8_t>(byte + carry));
      byte = 0xFF;
    } while (--cache_size_ != 0);
    cache_ = static_cast<uint8_t>(low_ >> 24);
  }
  ++cache_size_;
  low_ = (low_ << 8) & 0xFFFFFFFFu;
}

RangeDecoder::RangeDecoder(std::span<const uint8_t> bytes, size_t& pos)
    : bytes_(bytes), pos_(pos) {
  next_byte();  // counterpart of the encoder's leading cache byte
  for (int i = 0; i < 4; ++i) code_ = (code_ << 8) | next_byte();
}

uint32_t RangeDecoder::decode_freq(uint32_t total) {
  range_ /= total;
  const uint32_t v = code_ / range_;
  return std::min(v, total - 1);
}

void RangeDecoder::decode_update(uint32_t cum, uint32_t freq) {
  code_ -= cum * range_;
  range_ *= freq;
  while (range_ < kTopValue) {
    code_ = (code_ << 8) | next_byte();
    range_ <<= 8;
  }
}

uint8_t RangeDecoder::next_byte() {
  if (pos_ >= bytes_.size()) throw Error("range coder: truncated payload");
  return bytes_[pos_++];
}

std::vector<uint8_t> pack_indices(std::span<const int32_t> indices) {
  std::vector<uint8_t> out;
  put_varint(out, indices.size());
  if (indices.empty()) return out;

  const auto [mn_it, mx_it] = std::minmax_element(indices.begin(), indices.end());
  const int32_t mn = *mn_it;
  const uint32_t alphabet = static_cast<uint32_t>(*mx_it - mn) + 1;
  put_varint(out, zigzag(mn));
  put_varint(out, alphabet);

  std::vector<uint32_t> counts(alphabet, 0);
  for (int32_t v : indices) ++counts[static_cast<uint32_t>(v - mn)];

  // Rescale so the total stays within the coder's headroom.
  uint64_t total = indices.size();
  if (total > kMaxTotal) {
    uint64_t scaled_total = 0;
    for (auto& c : counts) {
      if (c > 0) {
        c = static_cast<uint32_t>(
            std::max<uint64_t>(1, (static_cast<uint64_t>(c) * kMaxTotal) / total));
      }
      scaled_total += c;
    }
    total = scaled_total;
  }
  for (uint32_t c : counts) put_varint(out, c);

  std::vector<uint32_t> cum(alphabet + 1, 0);
  for (uint32_t i = 0; i < alphabet; ++i) cum[i + 1] = cum[i] + counts[i];

  RangeEncoder enc(out);
  for (int32_t v : indices) {
    const uint32_t sym = static_cast<uint32_t>(v - mn);
    enc.encode(cum[sym], counts[sym], static_cast<uint32_t>(total));
  }
  enc.flush();
  return out;
}

std::vector<int32_t> unpack_indices(std::span<const uint8_t> bytes) {
  size_t pos = 0;
  const uint64_t count = get_varint(bytes, pos);
  std::vector<int32_t> out;
  if (count == 0) return out;
  if (count > (1ull << 32)) throw Error("range coder: implausible symbol count");
  const int32_t mn = static_cast<int32_t>(unzigzag(get_varint(bytes, pos)));
  const uint64_t alphabet = get_varint(bytes, pos);
  if (alphabet == 0 || alphabet > (1u << 20)) throw Error("range coder: bad alphabet size");

  std::vector<uint32_t> counts(alphabet);
  uint64_t total = 0;
  for (auto& c : counts) {
    c = static_cast<uint32_t>(get_varint(bytes, pos));
    total += c;
  }
  if (total == 0 || total > kMaxTotal) throw Error("range coder: bad frequency table");
  std::vector<uint32_t> cum(alphabet + 1, 0);
  for (uint64_t i = 0; i < alphabet; ++i) cum[i + 1] = cum[i] + counts[i];

  RangeDecoder dec(bytes, pos);
  out.reserve(count);
  for (uint64_t i = 0; i < count; ++i) {
    const uint32_t f = dec.decode_freq(static_cast<uint32_t>(total));
    const uint32_t sym =
        static_cast<uint32_t>(std::upper_bound(cum.begin(), cum.end(), f) - cum.begin()) - 1;
    dec.decode_update(cum[sym], counts[sym]);
    out.push_back(static_cast<int32_t>(sym) + mn);
  }
  return out;
}

}  // namespace mdr
