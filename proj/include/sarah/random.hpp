#pragma once

#include <cstdint>

namespace sarah {

/// Counter-based generator: the n-th output of a stream is the SplitMix64
/// finalizer applied to key + n * 0x9E3779B97F4A7C15, where key is derived
/// from (seed, stream). Outputs depend only on (seed, stream, counter), so
/// traces are portable across platforms and standard libraries.
///
/// Integer draws use rejection sampling and gaussians use Box-Muller; the
/// standard library distributions are avoided because their algorithms are
/// implementation-defined.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0);

  /// Independent generator for a named sub-stream.
  CounterRng split(std::uint64_t stream) const;

  std::uint64_t next_u64();
  /// Uniform on [0, n); n must be positive.
  std::uint64_t uniform_index(std::uint64_t n);
  /// Uniform on [0, 1) with 53 random bits.
  double uniform01();
  double normal();

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64_mix(std::uint64_t z);

}  // namespace sarah
