#include "treid/rng.hpp"

#include <cmath>
#include <numbers>

namespace treid {

double GaussianStream::next() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // Box-Muller; u1 is nudged away from 0 so log stays finite.
    double u1 = rng_.uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double u2 = rng_.uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

}  // namespace treid
