#ifndef WEYLWALK_RNG_HPP
#define WEYLWALK_RNG_HPP

#include <cstdint>

namespace weylwalk::rng {

/// Counter-based splittable random stream: the generator state is a pure
/// function of (seed, stream_id, sample_index), so sample i of a scenario is
/// bit-identical no matter how the work is partitioned across threads.
class Stream {
public:
    Stream(uint64_t seed, uint64_t stream_id, uint64_t sample_index);

    uint64_t next_u64();
    double u01();    // uniform in (0, 1)
    double normal(); // standard normal via Box-Muller
    bool coin(double p_true);

private:
    uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace weylwalk::rng

#endif
