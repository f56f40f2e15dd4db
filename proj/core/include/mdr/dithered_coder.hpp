#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace mdr {

// Entropy coder for subtractive-dither uniform-quantizer indices of a
// zero-mean Gaussian input. The symbol model is parametric: per-sample cell
// probabilities are Gaussian cell masses with the edges shifted by the
// sample's dither, precomputed over a grid of dither bins. Encoder and
// decoder regenerate the same dither stream, so no table header is stored
// and the coded size tracks the conditional index entropy.
class DitheredCellCoder {
 public:
  // sigma: input standard deviation; delta: quantizer step; max_index:
  // clamp bound (tail mass folds into the edge cells, matching the
  // quantizer's clamping).
  DitheredCellCoder(double sigma, double delta, int max_index, int dither_bins = 32);

  std::vector<uint8_t> encode(std::span<const int32_t> indices,
                              std::span<const double> dithers) const;
  std::vector<int32_t> decode(std::span<const uint8_t> bytes, size_t count,
                              std::span<const double> dithers) const;

  int alphabet() const { return 2 * max_index_ + 1; }

 private:
  int bin_of(double dither) const;

  double delta_ = 1.0;
  int max_index_ = 1;
  int bins_ = 32;
  uint32_t total_ = 0;
  std::vector<std::vector<uint32_t>> cum_;  // per bin, size alphabet + 1
};

}  // namespace mdr
