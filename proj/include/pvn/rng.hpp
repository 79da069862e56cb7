#pragma once

#include "pvn/types.hpp"

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include <cstdint>
#include <random>

namespace pvn {

using Rng = std::mt19937_64;

/// Seed of the independent stream addressed by (master, index, salt). Pure function of its inputs,
/// so any trial can be regenerated in isolation.
std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index, std::uint64_t salt = 0);

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

inline double uniform(Rng& rng, Interval iv) {
    if (iv.lo == iv.hi) {
        return iv.lo;
    }
    return boost::random::uniform_real_distribution<double>(iv.lo, iv.hi)(rng);
}

inline int uniform_int(Rng& rng, IntInterval iv) {
    return boost::random::uniform_int_distribution<int>(iv.lo, iv.hi)(rng);
}

/// Circular complex Gaussian with E|z|^2 = variance.
inline cd complex_normal(Rng& rng, double variance) {
    boost::random::normal_distribution<double> n(0.0, std::sqrt(variance / 2.0));
    const double re = n(rng);
    const double im = n(rng);
    return {re, im};
}

}  // namespace pvn
