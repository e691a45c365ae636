// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace beamtrack {

using Rng = std::mt19937_64;

/// Derives an independent stream seed from a master seed. Splitmix64 finalizer,
/// so neighbouring stream ids map to uncorrelated seeds.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream)
{
    std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline Rng make_rng(std::uint64_t master, std::uint64_t stream)
{
    return Rng(derive_seed(master, stream));
}

inline double gaussian(Rng& rng, double mean = 0.0, double std_dev = 1.0)
{
    std::normal_distribution<double> dist(mean, std_dev);
    return dist(rng);
}

/// Circularly-symmetric complex Gaussian CN(0, std_total^2): each component has
/// variance std_total^2 / 2.
inline std::complex<double> complex_gaussian(Rng& rng, double std_total)
{
    const double s = std_total / std::sqrt(2.0);
    return {gaussian(rng, 0.0, s), gaussian(rng, 0.0, s)};
}

inline double uniform(Rng& rng, double lo, double hi)
{
    std::uniform_real_distribution<double> dist(lo, hi);
    return dist(rng);
}

} // namespace beamtrack
