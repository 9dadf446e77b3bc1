#pragma once

#include <cmath>
#include <cstdint>

namespace qshadow::util {

/// SplitMix64 finalizer; also used as the avalanche step for seed derivation.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::uint64_t mix64(std::uint64_t x) {
  std::uint64_t s = x;
  return splitmix64_next(s);
}

/// xoshiro256++ with a splitmix64-expanded seed. Hand-rolled so that streams
/// are identical across compilers and platforms, which the reproducibility
/// contract needs (std::normal_distribution is implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& w : state_) w = splitmix64_next(s);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Standard normal via the Marsaglia polar method.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double a, b, q;
    do {
      a = 2.0 * uniform() - 1.0;
      b = 2.0 * uniform() - 1.0;
      q = a * a + b * b;
    } while (q >= 1.0 || q == 0.0);
    const double f = std::sqrt(-2.0 * std::log(q) / q);
    spare_ = b * f;
    have_spare_ = true;
    return a * f;
  }

  void fill_normal(double* dst, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = normal();
  }

  /// Poisson sample; Knuth multiplication for small means, Hormann's PTRS
  /// transformed rejection above that. Exact for all finite means >= 0.
  std::uint64_t poisson(double mean);

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::uint64_t state_[4] = {};
  double spare_ = 0.0;
  bool have_spare_ = false;
};

/// Deterministic per-stream seed for (master, cluster, frame). Sequentially
/// absorbs each component through the splitmix64 avalanche, so permuted
/// inputs land on unrelated streams.
inline std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t cluster_index,
                                        std::uint64_t frame_index) {
  std::uint64_t h = 0x243F6A8885A308D3ull;  // pi fractional bits
  h = mix64(h ^ master);
  h = mix64(h ^ cluster_index);
  h = mix64(h ^ frame_index);
  return h;
}

}  // namespace qshadow::util
