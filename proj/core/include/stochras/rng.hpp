#pragma once

#include <cstdint>

namespace stochras {

/// Counter-based random stream: draw i is a keyed hash of the counter i, so a
/// stream is fully determined by its 64-bit key and streams can be split
/// without coordination. Gaussian draws use Box-Muller so results are
/// bit-identical across standard libraries.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal.
  double normal();
  /// +1 or -1 with equal probability.
  double sign();

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

/// SplitMix64 finalizer (bijective 64-bit mix).
std::uint64_t mix64(std::uint64_t z);

/// Independent, reproducible stream for trial `trial_index` under `master_seed`.
CounterRng derive_trial_rng(std::uint64_t master_seed, std::uint64_t trial_index);

}  // namespace stochras
