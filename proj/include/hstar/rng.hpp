#pragma once

#include <array>
#include <cstdint>
#include <limits>

#include <boost/random/normal_distribution.hpp>

namespace hstar {

using seed_t = std::uint64_t;

// SplitMix64 finaliser (Steele, Lea & Flood 2014).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30))*0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27))*0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// xoshiro256** 1.0 (Blackman & Vigna). Value type; copy to fork.
//
// Stream derivation, stable across releases:
//   state word i = mix64(mix64(seed) ^ mix64(stream ^ K) + i*golden), i = 0..3
// with K = 0xd1b54a32d192ed03 and golden = 0x9e3779b97f4a7c15. Distinct
// (seed, stream) pairs give unrelated states; no stream shares a prefix with
// another.
class rng {
public:
    using result_type = std::uint64_t;

    rng() : rng(0, 0) {}
    rng(seed_t seed, std::uint64_t stream) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        const std::uint64_t result = rotl(s_[1]*5, 7)*9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform on the open interval (0, 1), 53-bit resolution.
    double uniform_open() noexcept {
        return (static_cast<double>((*this)() >> 11) + 0.5)*0x1.0p-53;
    }

    const std::array<std::uint64_t, 4>& state() const noexcept { return s_; }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> s_{};
};

// Independent stream for (seed, stream index).
inline rng derive(seed_t seed, std::uint64_t stream) noexcept { return rng(seed, stream); }

// Combines several integer keys into one stream index.
constexpr std::uint64_t stream_key(std::uint64_t a, std::uint64_t b) noexcept {
    return mix64(a ^ mix64(b + 0x632be59bd9b4e019ULL));
}

// Standard normal variate (Boost ziggurat; the distribution object carries
// no state between draws).
inline double standard_normal(rng& g) {
    boost::random::normal_distribution<double> dist;
    return dist(g);
}

// A fresh seed from the OS entropy source.
seed_t random_seed();

} // namespace hstar
