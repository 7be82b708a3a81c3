#include "stochras/rng.hpp"

#include <cmath>
#include <numbers>

namespace stochras {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
}  // namespace

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t CounterRng::next_u64() {
  const std::uint64_t c = counter_++;
  return mix64(mix64(c * kGolden ^ key_) + rotl(key_, 32));
}

double CounterRng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double CounterRng::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_normal_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  cached_normal_ = r * std::sin(theta);
  has_cached_ = true;
  return r * std::cos(theta);
}

double CounterRng::sign() { return (next_u64() >> 63) != 0 ? 1.0 : -1.0; }

CounterRng derive_trial_rng(std::uint64_t master_seed, std::uint64_t trial_index) {
  const std::uint64_t key = mix64(mix64(master_seed + kGolden) ^ mix64(trial_index * kGolden + 1));
  return CounterRng(key);
}

}  // namespace stochras
