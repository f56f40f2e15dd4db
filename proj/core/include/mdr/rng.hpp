#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace mdr {

// Deterministic, dependency-free generator used for sources, dithers and
// shaping noise. Every stream owns its own state derived from the run seed,
// so encode, decode and repair regenerate identical randomness.
struct SplitMix64 {
  uint64_t state = 0;

  uint64_t next() {
    uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform in (0, 1].
  double uniform01() { return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53; }

  // Uniform in [-half, half).
  double dither(double half) { return (uniform01() - 0.5) * 2.0 * half - 0.0; }
};

inline uint64_t derive_seed(uint64_t base, uint64_t a, uint64_t b = 0, uint64_t c = 0) {
  SplitMix64 s{base};
  s.state ^= 0x9E3779B97F4A7C15ull * (a + 1);
  s.next();
  s.state ^= 0xC2B2AE3D27D4EB4Full * (b + 1);
  s.next();
  s.state ^= 0x165667B19E3779F9ull * (c + 1);
  return s.next();
}

// Box-Muller standard normals with the spare cached.
class NormalSampler {
 public:
  explicit NormalSampler(uint64_t seed) : rng_{seed} {}

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = rng_.uniform01();
    const double u2 = rng_.uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(phi);
    has_spare_ = true;
    return r * std::cos(phi);
  }

 private:
  SplitMix64 rng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace mdr
