#pragma once

// Counter-based random streams.
//
// A stream is identified by a 64-bit key derived from (master seed, stream
// indices). Output k of a stream is splitmix64(key + k * golden), so any draw
// can be reproduced from its key and position alone, regardless of how work
// was split across threads.

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>

namespace qnoise {

inline constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Folds a master seed and any number of indices into a stream key.
inline constexpr std::uint64_t derive_key(std::uint64_t seed, std::initializer_list<std::uint64_t> indices) {
  std::uint64_t key = splitmix64_mix(seed + 0x9E3779B97F4A7C15ULL);
  for (std::uint64_t idx : indices) key = splitmix64_mix(key ^ splitmix64_mix(idx + 0xD1B54A32D192ED03ULL));
  return key;
}

/// UniformRandomBitGenerator over a counter. Copyable; each copy continues
/// independently from the same position.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key) : key_(key) {}
  CounterRng(std::uint64_t seed, std::initializer_list<std::uint64_t> indices) : key_(derive_key(seed, indices)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    ++counter_;
    return splitmix64_mix(key_ + counter_ * 0x9E3779B97F4A7C15ULL);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  double normal(double mean = 0.0, double stddev = 1.0) {
    std::normal_distribution<double> dist(mean, stddev);
    return dist(*this);
  }

  std::uint64_t key() const { return key_; }
  std::uint64_t position() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace qnoise
