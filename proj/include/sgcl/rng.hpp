#pragma once

#include <cstdint>
#include <initializer_list>

namespace sgcl {

// Counter-style splittable RNG (splitmix64 core). Streams are derived by
// hashing a key tuple such as (seed, epoch, batch, session, method), so any
// draw sequence is reproducible regardless of scheduling order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed * 0x9E3779B97F4A7C15ULL + 0x243F6A8885A308D3ULL) {}

  static Rng from_key(std::initializer_list<std::uint64_t> key) {
    std::uint64_t h = 0x243F6A8885A308D3ULL;
    for (std::uint64_t k : key) {
      h ^= mix(k + 0x9E3779B97F4A7C15ULL);
      h = mix(h);
    }
    return Rng(h);
  }

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  // Uniform in [0, 1). 53-bit mantissa, identical on every platform.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). n must be positive.
  int next_int(int n) { return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n)); }

  // Uniform in [lo, hi).
  double next_range(double lo, double hi) { return lo + (hi - lo) * next_double(); }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace sgcl
