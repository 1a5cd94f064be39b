#include "hierid/rng.hpp"

#include <cmath>

namespace hierid {

double Rng::normal() noexcept {
    // Box-Muller, cosine branch only.
    const double u1 = uniform_pos();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double Rng::exponential(double mean) noexcept {
    return -mean * std::log(uniform_pos());
}

}  // namespace hierid
