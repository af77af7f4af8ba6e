#include "weylwalk/rng.hpp"

#include <cmath>

namespace weylwalk::rng {

namespace {

inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

} // namespace

Stream::Stream(uint64_t seed, uint64_t stream_id, uint64_t sample_index) {
    // absorb the three key components through the mixer so that nearby
    // (seed, stream, index) triples give unrelated states
    uint64_t s = seed;
    uint64_t a = splitmix64(s);
    s ^= stream_id * 0xD1342543DE82EF95ULL;
    uint64_t b = splitmix64(s);
    s ^= sample_index * 0x9E3779B97F4A7C15ULL;
    uint64_t c = splitmix64(s);
    state_ = a ^ (b * 0xFF51AFD7ED558CCDULL) ^ (c * 0xC4CEB9FE1A85EC53ULL);
}

uint64_t Stream::next_u64() { return splitmix64(state_); }

double Stream::u01() {
    // 53-bit mantissa, strictly inside (0, 1)
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double Stream::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    const double u1 = u01(), u2 = u01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.28318530717958647692528676655900577 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
}

bool Stream::coin(double p_true) { return u01() < p_true; }

} // namespace weylwalk::rng
