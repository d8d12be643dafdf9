#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace adeuq {

/// Seedable 64-bit generator: std::mt19937_64 (whose output sequence is
/// fixed by the C++ standard) plus Box-Muller normals. Not thread-safe;
/// give every concurrent task its own stream via stream_seed().
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in (0, 1], 53 bits of resolution.
  double uniform();

  /// Standard normal. Box-Muller: each pair of uniforms yields two
  /// normals and the second one is returned by the following call.
  double normal();

  /// Uniform integer in [0, n), rejection-sampled so it is unbiased.
  std::size_t below(std::size_t n);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Per-sample stream rule: seed of stream `index` under `base`.
constexpr std::uint64_t stream_seed(std::uint64_t base, std::uint64_t index) {
  return base ^ index;
}

}  // namespace adeuq
