#include "wignerscope/rng.hpp"

#include <cmath>
#include <numbers>

namespace wignerscope {

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
    : key_(splitmix64_mix(seed ^ splitmix64_mix(stream + kGamma))) {}

double CounterRng::normal(std::uint64_t index) const noexcept {
  double u1 = uniform_open(2 * index);
  double u2 = uniform(2 * index + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace wignerscope
