#include "hstar/rng.hpp"

#include <random>

namespace hstar {

rng::rng(seed_t seed, std::uint64_t stream) noexcept {
    const std::uint64_t base = mix64(seed) ^ mix64(stream ^ 0xd1b54a32d192ed03ULL);
    for (std::size_t i = 0; i < s_.size(); ++i) {
        s_[i] = mix64(base + i*0x9e3779b97f4a7c15ULL);
    }
    // xoshiro must not start from the all-zero state.
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
}

seed_t random_seed() {
    std::random_device rd;
    return (static_cast<seed_t>(rd()) << 32) ^ rd();
}

} // namespace hstar
