#include "qrebal/random.hpp"

#include <cmath>
#include <numbers>

namespace qrebal {

double Rng::normal() {
    if (has_cached_) {
        has_cached_ = false;
        return cached_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) {
        u1 = uniform();
    }
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    cached_ = radius * std::sin(angle);
    has_cached_ = true;
    return radius * std::cos(angle);
}

}  // namespace qrebal
