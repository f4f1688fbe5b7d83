#pragma once

#include <cstdint>
#include <random>

namespace bandgraph {

using Rng = std::mt19937_64;

namespace detail {
// splitmix64 finalizer; decorrelates seeds that differ in a few bits.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
}  // namespace detail

/// Independent stream for (seed, stream); used to give replicates and
/// chains their own generators.
inline Rng make_stream(std::uint64_t seed, std::uint64_t stream = 0) {
    std::seed_seq seq{detail::mix64(seed), detail::mix64(seed ^ (stream + 1)),
                      detail::mix64(stream), detail::mix64(seed + 0x51ed2701)};
    return Rng(seq);
}

inline double draw_normal(Rng& rng, double mean = 0.0, double sd = 1.0) {
    std::normal_distribution<double> d(mean, sd);
    return d(rng);
}

inline double draw_gamma(Rng& rng, double shape, double scale) {
    std::gamma_distribution<double> d(shape, scale);
    return d(rng);
}

inline double draw_chisq(Rng& rng, double dof) {
    return draw_gamma(rng, 0.5 * dof, 2.0);
}

inline double draw_uniform(Rng& rng, double lo = 0.0, double hi = 1.0) {
    std::uniform_real_distribution<double> d(lo, hi);
    return d(rng);
}

}  // namespace bandgraph
