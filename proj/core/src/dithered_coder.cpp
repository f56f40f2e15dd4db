#include "mdr/dithered_coder.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mdr/errors.hpp"
#include "mdr/range_coder.hpp"

namespace mdr {

namespace {

constexpr uint32_t kFreqScale = 1u << 18;

double gauss_cdf(double x, double sigma) {
  return 0.5 * (1.0 + std::erf(x / (sigma * std::numbers::sqrt2)));
}

}  // namespace

DitheredCellCoder::DitheredCellCoder(double sigma, double delta, int max_index, int dither_bins)
    : delta_(delta), max_index_(max_index), bins_(dither_bins) {
  if (!(sigma > 0.0) || !(delta > 0.0) || max_index < 1 || dither_bins < 1) {
    throw InvalidParams("dithered coder: bad model parameters");
  }
  const int alpha = alphabet();
  total_ = kFreqScale + static_cast<uint32_t>(2 * alpha);
  cum_.assign(bins_, std::vector<uint32_t>(alpha + 1, 0));
  for (int b = 0; b < bins_; ++b) {
    // Representative dither for the bin (bin centers tile [-delta/2, delta/2)).
    const double d = ((b + 0.5) / bins_ - 0.5) * delta;
    std::vector<uint32_t> freq(alpha, 0);
    uint64_t sum = 0;
    size_t largest = 0;
    for (int sym = 0; sym < alpha; ++sym) {
      const int idx = sym - max_index_;
      // Clamping folds the tails into the edge cells.
      const double lo = (idx == -max_index_)
                            ? 0.0
                            : gauss_cdf((idx - 0.5) * delta - d, sigma);
      const double hi = (idx == max_index_)
                            ? 1.0
                            : gauss_cdf((idx + 0.5) * delta - d, sigma);
      const double p = std::max(0.0, hi - lo);
      freq[sym] = std::max<uint32_t>(1, static_cast<uint32_t>(std::lround(p * kFreqScale)));
      sum += freq[sym];
      if (freq[sym] > freq[largest]) largest = sym;
    }
    // Pin every bin to the same total by absorbing rounding in the most
    // probable cell.
    const int64_t diff = static_cast<int64_t>(total_) - static_cast<int64_t>(sum);
    const int64_t fixed = static_cast<int64_t>(freq[largest]) + diff;
    if (fixed < 1) throw InvalidParams("dithered coder: frequency normalization failed");
    freq[largest] = static_cast<uint32_t>(fixed);
    for (int sym = 0; sym < alpha; ++sym) cum_[b][sym + 1] = cum_[b][sym] + freq[sym];
  }
}

int DitheredCellCoder::bin_of(double dither) const {
  const double t = dither / delta_ + 0.5;  // in [0, 1)
  int b = static_cast<int>(t * bins_);
  return std::clamp(b, 0, bins_ - 1);
}

std::vector<uint8_t> DitheredCellCoder::encode(std::span<const int32_t> indices,
                                               std::span<const double> dithers) const {
  if (indices.size() != dithers.size()) throw InvalidParams("dithered coder: length mismatch");
  std::vector<uint8_t> out;
  if (indices.empty()) return out;
  RangeEncoder enc(out);
  for (size_t t = 0; t < indices.size(); ++t) {
    const int sym = indices[t] + max_index_;
    if (sym < 0 || sym >= alphabet()) throw InvalidParams("dithered coder: index out of range");
    const std::vector<uint32_t>& c = cum_[bin_of(dithers[t])];
    enc.encode(c[sym], c[sym + 1] - c[sym], total_);
  }
  enc.flush();
  return out;
}

std::vector<int32_t> DitheredCellCoder::decode(std::span<const uint8_t> bytes, size_t count,
                                               std::span<const double> dithers) const {
  if (count != dithers.size()) throw InvalidParams("dithered coder: length mismatch");
  std::vector<int32_t> out;
  if (count == 0) return out;
  out.reserve(count);
  size_t pos = 0;
  RangeDecoder dec(bytes, pos);
  for (size_t t = 0; t < count; ++t) {
    const std::vector<uint32_t>& c = cum_[bin_of(dithers[t])];
    const uint32_t f = dec.decode_freq(total_);
    const uint32_t sym =
        static_cast<uint32_t>(std::upper_bound(c.begin(), c.end(), f) - c.begin()) - 1;
    dec.decode_update(c[sym], c[sym + 1] - c[sym]);
    out.push_back(static_cast<int32_t>(sym) - max_index_);
  }
  return out;
}

}  // namespace mdr
