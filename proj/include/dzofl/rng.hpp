#pragma once

#include <cstdint>
#include <cmath>

// Counter-based pseudorandomness. Every random quantity in the simulator is a
// pure function of (seed, stream tag, counter...), so replays and
// checkpoint-resume are bit-exact by construction and no generator state has
// to be serialized. The mixer is the splitmix64 finalizer, chained once per
// key word, which is plenty for the statistical tests this project runs
// (unbiasedness and cross-moment checks at the 1e-3 level).

namespace dzofl::rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix(std::uint64_t seed, std::uint64_t a) {
    return splitmix64(splitmix64(seed) ^ a);
}

inline std::uint64_t mix(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return splitmix64(mix(seed, a) ^ b);
}

inline std::uint64_t mix(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                         std::uint64_t c) {
    return splitmix64(mix(seed, a, b) ^ c);
}

// Uniform double in [0, 1) from the top 53 bits.
inline double to_unit(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Standard normal via Box-Muller on two counter words. Used for task
// generation only; avoids std::normal_distribution, whose output is
// implementation-defined and would break cross-platform determinism.
inline double to_gaussian(std::uint64_t bits_a, std::uint64_t bits_b) {
    // guard against log(0)
    double u1 = (static_cast<double>(bits_a >> 11) + 1.0) * 0x1.0p-53;
    double u2 = to_unit(bits_b);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

} // namespace dzofl::rng
