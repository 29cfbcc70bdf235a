#pragma once

#include <cstdint>
#include <random>

namespace pqr {

using Rng = std::mt19937_64;

/// Independent stream for (master seed, stream index); used for replicates and parallel chains.
inline Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return Rng(seq);
}

/// Uniform draw on the open interval (0, 1).
inline double uniform_open(Rng& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double u = unif(rng);
    while (u <= 0.0) u = unif(rng);
    return u;
}

inline double standard_normal(Rng& rng) {
    std::normal_distribution<double> norm(0.0, 1.0);
    return norm(rng);
}

}  // namespace pqr
