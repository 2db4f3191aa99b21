#pragma once

#include <cstdint>

#include "mast/tensor.hpp"

namespace mast {

/// Counter-based generator: the value at (seed, stream, index) is the
/// SplitMix64 finalizer applied to a mix of the three words. No hidden state,
/// so any element can be regenerated independently and results do not depend
/// on iteration order or thread count. Only integer arithmetic and exact
/// float scaling are used, so streams are bit-identical across platforms.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t bits(std::uint64_t index) const {
    return mix(mix(seed_ ^ mix(stream_)) + index);
  }

  /// Uniform in [0, 1) with 24 significant bits.
  float uniform(std::uint64_t index) const {
    return static_cast<float>(bits(index) >> 40) * (1.0f / 16777216.0f);
  }

  /// Uniform in [lo, hi).
  float uniform(std::uint64_t index, float lo, float hi) const { return lo + (hi - lo) * uniform(index); }

  /// Approximately standard normal: centred, variance-scaled sum of four
  /// uniforms (Irwin-Hall). Bounded in [-2*sqrt(3), 2*sqrt(3)].
  float normal(std::uint64_t index) const {
    float s = 0.0f;
    for (std::uint64_t k = 0; k < 4; ++k) s += uniform(4 * index + k);
    return (s - 2.0f) * 1.7320508f;
  }

  std::uint64_t below(std::uint64_t index, std::uint64_t n) const { return bits(index) % n; }

  CounterRng substream(std::uint64_t tag) const { return CounterRng(seed_, mix(stream_ ^ mix(tag))); }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
};

/// Tensor of approximately normal values scaled by `scale`.
Tensor random_normal(const CounterRng& rng, Shape shape, float scale = 1.0f);
Tensor random_uniform(const CounterRng& rng, Shape shape, float lo, float hi);

}  // namespace mast
