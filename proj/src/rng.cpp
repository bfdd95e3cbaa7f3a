#include "drln/rng.hpp"

#include <cmath>

namespace drln {

double Rng::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    // Box-Muller; u1 kept away from 0.
    double u1 = 0.0;
    do {
        u1 = next_double();
    } while (u1 <= 0.0);
    const double u2 = next_double();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    const double two_pi = 6.283185307179586476925286766559;
    spare_ = mag * std::sin(two_pi * u2);
    have_spare_ = true;
    return mag * std::cos(two_pi * u2);
}

Rng Rng::derive(std::uint64_t seed, std::uint64_t index) {
    Rng mix(seed ^ (0x9e3779b97f4a7c15ULL + index * 0xd1342543de82ef95ULL));
    // One warm-up step decorrelates adjacent indices.
    return Rng(mix.next_u64());
}

}  // namespace drln
