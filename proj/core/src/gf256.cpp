#include "mdr/gf256.hpp"

#include <array>
#include <cstring>

#include "mdr/errors.hpp"

namespace mdr {

namespace gf256 {

namespace {

// x^8 + x^4 + x^3 + x^2 + 1
constexpr uint16_t kPoly = 0x11D;

struct Tables {
  std::array<uint8_t, 512> exp{};
  std::array<uint8_t, 256> log{};
  Tables() {
    uint16_t x = 1;
    for (int i = 0; i < 255; ++i) {
      exp[i] = static_cast<uint8_t>(x);
      log[x] = static_cast<uint8_t>(i);
      x <<= 1;
      if (x & 0x100) x ^= kPoly;
    }
    for (int i = 255; i < 512; ++i) exp[i] = exp[i - 255];
  }
};

const Tables& tables() {
  static const Tables t;
  return t;
}

}  // namespace

uint8_t mul(uint8_t a, uint8_t b) {
  if (a == 0 || b == 0) return 0;
  const Tables& t = tables();
  return t.exp[t.log[a] + t.log[b]];
}

uint8_t div(uint8_t a, uint8_t b) {
  if (b == 0) throw InvalidParams("gf256: division by zero");
  if (a == 0) return 0;
  const Tables& t = tables();
  return t.exp[t.log[a] + 255 - t.log[b]];
}

uint8_t inv(uint8_t a) { return div(1, a); }

uint8_t exp(int e) {
  e %= 255;
  if (e < 0) e += 255;
  return tables().exp[e];
}

uint8_t log(uint8_t a) {
  if (a == 0) throw InvalidParams("gf256: log of zero");
  return tables().log[a];
}

}  // namespace gf256

namespace {

// In-place Gauss-Jordan inverse of a k x k matrix over GF(256).
std::vector<std::vector<uint8_t>> invert(std::vector<std::vector<uint8_t>> m) {
  const size_t k = m.size();
  std::vector<std::vector<uint8_t>> inv(k, std::vector<uint8_t>(k, 0));
  for (size_t i = 0; i < k; ++i) inv[i][i] = 1;
  for (size_t col = 0; col < k; ++col) {
    size_t pivot = col;
    while (pivot < k && m[pivot][col] == 0) ++pivot;
    if (pivot == k) throw Error("gf256: singular decode matrix");
    std::swap(m[pivot], m[col]);
    std::swap(inv[pivot], inv[col]);
    const uint8_t p = m[col][col];
    for (size_t j = 0; j < k; ++j) {
      m[col][j] = gf256::div(m[col][j], p);
      inv[col][j] = gf256::div(inv[col][j], p);
    }
    for (size_t row = 0; row < k; ++row) {
      if (row == col || m[row][col] == 0) continue;
      const uint8_t f = m[row][col];
      for (size_t j = 0; j < k; ++j) {
        m[row][j] ^= gf256::mul(f, m[col][j]);
        inv[row][j] ^= gf256::mul(f, inv[col][j]);
      }
    }
  }
  return inv;
}

}  // namespace

ReedSolomon::ReedSolomon(int n, int k) : n_(n), k_(k) {
  if (k < 1 || n < k || n > 255) throw InvalidParams("reed-solomon: need 1 <= k <= n <= 255");
  // Systematic matrix: Vandermonde rows times the inverse of its top k x k
  // block, so every k x k submatrix stays invertible and the first k rows
  // are the identity.
  std::vector<std::vector<uint8_t>> vand(n, std::vector<uint8_t>(k));
  for (int i = 0; i < n; ++i) {
    const uint8_t x = gf256::exp(i);
    uint8_t p = 1;
    for (int j = 0; j < k; ++j) {
      vand[i][j] = p;
      p = gf256::mul(p, x);
    }
  }
  std::vector<std::vector<uint8_t>> top(vand.begin(), vand.begin() + k);
  const auto top_inv = invert(std::move(top));
  parity_rows_.assign(n - k, std::vector<uint8_t>(k, 0));
  for (int i = k; i < n; ++i) {
    for (int j = 0; j < k; ++j) {
      uint8_t acc = 0;
      for (int t = 0; t < k; ++t) acc ^= gf256::mul(vand[i][t], top_inv[t][j]);
      parity_rows_[i - k][j] = acc;
    }
  }
}

std::vector<std::vector<uint8_t>> ReedSolomon::encode(
    const std::vector<std::vector<uint8_t>>& data) const {
  if (static_cast<int>(data.size()) != k_) throw InvalidParams("reed-solomon: need k data shards");
  const size_t len = data.empty() ? 0 : data[0].size();
  for (const auto& shard : data) {
    if (shard.size() != len) throw InvalidParams("reed-solomon: shard sizes differ");
  }
  std::vector<std::vector<uint8_t>> shards = data;
  for (int p = 0; p < n_ - k_; ++p) {
    std::vector<uint8_t> parity(len, 0);
    for (int j = 0; j < k_; ++j) {
      const uint8_t c = parity_rows_[p][j];
      if (c == 0) continue;
      const auto& src = data[j];
      for (size_t b = 0; b < len; ++b) parity[b] ^= gf256::mul(c, src[b]);
    }
    shards.push_back(std::move(parity));
  }
  return shards;
}

std::vector<std::vector<uint8_t>> ReedSolomon::decode(
    const std::vector<std::vector<uint8_t>>& shards, const std::vector<bool>& present) const {
  if (static_cast<int>(shards.size()) != n_ || static_cast<int>(present.size()) != n_) {
    throw InvalidParams("reed-solomon: decode expects n shard slots");
  }
  std::vector<int> avail;
  for (int i = 0; i < n_ && static_cast<int>(avail.size()) < k_; ++i) {
    if (present[i]) avail.push_back(i);
  }
  if (static_cast<int>(avail.size()) < k_) throw Error("reed-solomon: fewer than k shards");
  size_t len = shards[avail[0]].size();

  // Rows of the encoding matrix for the available shards.
  std::vector<std::vector<uint8_t>> rows(k_, std::vector<uint8_t>(k_, 0));
  bool systematic_only = true;
  for (int r = 0; r < k_; ++r) {
    const int idx = avail[r];
    if (idx < k_) {
      rows[r][idx] = 1;
      if (idx != r) systematic_only = false;
    } else {
      rows[r] = parity_rows_[idx - k_];
      systematic_only = false;
    }
  }
  if (systematic_only) {
    std::vector<std::vector<uint8_t>> data(k_);
    for (int r = 0; r < k_; ++r) data[r] = shards[avail[r]];
    return data;
  }
  const auto minv = invert(std::move(rows));
  std::vector<std::vector<uint8_t>> data(k_, std::vector<uint8_t>(len, 0));
  for (int i = 0; i < k_; ++i) {
    for (int r = 0; r < k_; ++r) {
      const uint8_t c = minv[i][r];
      if (c == 0) continue;
      const auto& src = shards[avail[r]];
      for (size_t b = 0; b < len; ++b) data[i][b] ^= gf256::mul(c, src[b]);
    }
  }
  return data;
}

std::vector<std::vector<uint8_t>> ReedSolomon::split_encode(
    std::span<const uint8_t> stream) const {
  const size_t shard_len = (stream.size() + k_ - 1) / k_;
  std::vector<std::vector<uint8_t>> data(k_, std::vector<uint8_t>(shard_len, 0));
  for (size_t i = 0; i < stream.size(); ++i) data[i / shard_len][i % shard_len] = stream[i];
  return encode(data);
}

std::vector<uint8_t> ReedSolomon::join_shards(
    const std::vector<std::vector<uint8_t>>& data_shards, size_t stream_len) const {
  std::vector<uint8_t> out;
  out.reserve(stream_len);
  for (const auto& shard : data_shards) {
    for (uint8_t b : shard) {
      if (out.size() == stream_len) return out;
      out.push_back(b);
    }
  }
  if (out.size() != stream_len) throw Error("reed-solomon: join underflow");
  return out;
}

}  // namespace mdr
