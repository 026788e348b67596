// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cmath>
#include <cstdint>
#include <random>

namespace thz {

/// Purposes keep the channel, phase-noise and AWGN draws of one sample on
/// separate streams, so changing e.g. the noise variance never shifts the
/// channel draws.
enum class StreamPurpose : std::uint64_t {
  Channel = 1,
  PhaseNoise = 2,
  Noise = 3,
  Pilots = 4,
  Shuffle = 5,
  Init = 6,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index,
                                    StreamPurpose purpose) noexcept {
  return splitmix64(splitmix64(seed) ^ splitmix64(index * 0x100000001B3ULL +
                                                  static_cast<std::uint64_t>(purpose)));
}

/// Seeded random stream. Gaussian draws go through std::normal_distribution
/// with unit variance and are scaled by the caller, so a zero variance still
/// consumes the same number of draws as a non-zero one.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng substream(std::uint64_t seed, std::uint64_t index, StreamPurpose purpose) {
    return Rng(derive_seed(seed, index, purpose));
  }

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }

  double normal() { return normal_(engine_); }

  /// Circular complex Gaussian with E|z|^2 = variance.
  std::complex<double> complex_normal(double variance) {
    const double s = std::sqrt(variance / 2.0);
    const double re = normal();
    const double im = normal();
    return {s * re, s * im};
  }

  std::uint64_t next_u64() { return engine_(); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace thz
