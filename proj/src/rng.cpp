#include "fetreg/rng.hpp"

#include <cmath>
#include <numbers>

namespace fetreg {

double CounterRng::normal(std::uint64_t i) const {
    // Box-Muller; u1 shifted away from 0 so the log stays finite.
    const double u1 = uniform(2 * i) + 0x1.0p-54;
    const double u2 = uniform(2 * i + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace fetreg
