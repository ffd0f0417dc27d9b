#pragma once

// Reproducible random streams.
//
// Every stochastic routine takes an RngSeed. Independent sub-streams are
// derived from a single seed with the SplitMix64 finalizer and fed to
// std::mt19937_64, whose output sequence is fixed by the C++ standard.
// Gaussian variates come from the Box-Muller transform implemented here, so
// paths are bit-reproducible across standard libraries (std::normal_distribution
// is not).

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace fracvol {

struct RngSeed {
  std::uint64_t value = 0;
};

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of sub-stream `stream` of `seed`. Distinct streams are statistically
/// independent for practical purposes.
inline constexpr RngSeed derive_seed(RngSeed seed, std::uint64_t stream) noexcept {
  return RngSeed{splitmix64(splitmix64(seed.value) ^ splitmix64(stream + 0x632BE59BD9B4E019ULL))};
}

class GaussianStream {
 public:
  explicit GaussianStream(RngSeed seed) : engine_(splitmix64(seed.value)) {}

  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double radius = std::sqrt(-2.0 * std::log(uniform()));
    const double angle = 2.0 * std::numbers::pi * uniform();
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace fracvol
