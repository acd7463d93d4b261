#pragma once

#include <cstdint>

namespace wignerscope {

/// SplitMix64 finalizer. Also the published mixing function used to derive
/// per-repetition seeds.
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based generator: draw(i) is a pure function of (seed, stream, i),
/// so records can be produced in any order or partition.
class CounterRng {
 public:
  static constexpr const char* kName = "splitmix64-counter";
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

  CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept;

  std::uint64_t bits(std::uint64_t counter) const noexcept {
    return splitmix64_mix(key_ + (counter + 1) * kGamma);
  }
  /// Uniform on [0, 1).
  double uniform(std::uint64_t counter) const noexcept {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }
  /// Uniform on (0, 1).
  double uniform_open(std::uint64_t counter) const noexcept {
    return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
  }
  /// Standard normal by Box-Muller from counters 2i and 2i+1.
  double normal(std::uint64_t index) const noexcept;

 private:
  std::uint64_t key_;
};

}  // namespace wignerscope
