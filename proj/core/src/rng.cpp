#include "tvkb/rng.hpp"

#include <cmath>
#include <numbers>

namespace tvkb {

double counter_normal(std::uint64_t seed, std::uint64_t counter) noexcept {
  // Box-Muller on two uniforms keyed by (seed, 2t) and (seed, 2t+1).
  const std::uint64_t a = derive_seed(seed, 2 * counter);
  const std::uint64_t b = derive_seed(seed, 2 * counter + 1);
  const double u1 = (static_cast<double>(a >> 11) + 0.5) * 0x1.0p-53;  // (0,1)
  const double u2 = static_cast<double>(b >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace tvkb
