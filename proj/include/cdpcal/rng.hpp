#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace cdpcal {

/// Deterministic 64-bit generator (splitmix64, Steele/Lea/Flood mixing
/// constants). The algorithm is pinned as part of the reproducibility
/// contract: standard-library engines are avoided because distribution
/// adaptors differ across toolchains, and report headers name this
/// algorithm so runs can be replayed elsewhere.
///
/// Draw rules, fixed so seeded streams are replayable:
///   - next_double(): top 53 bits of next_u64() scaled by 2^-53, in [0, 1).
///   - normal(): Box-Muller, exactly two uniforms per call, no caching.
///   - exponential(): inversion, one uniform per call.
class SplitMix64 {
 public:
  static constexpr std::string_view kAlgorithm = "splitmix64";

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  double normal() {
    double u1 = next_double();
    double u2 = next_double();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  double exponential() { return -std::log1p(-next_double()); }

  /// Seed for an independent substream: one scramble of the seed xored
  /// with a stream-indexed multiple of the splitmix64 increment. Documented
  /// because per-bin calibration streams are derived with this rule.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
    SplitMix64 g(seed ^ (0x9E3779B97F4A7C15ULL * (stream + 1)));
    return g.next_u64();
  }

 private:
  std::uint64_t state_;
};

}  // namespace cdpcal
