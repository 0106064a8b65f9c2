#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "rdr/point.hpp"

namespace rdr {

/// Seeded sources: identical (kind, params, seed) gives bit-identical output
/// across runs on one platform.  No ambient-entropy defaults anywhere.

inline RealVec gaussian_vec(Index n, std::uint64_t seed) {
    if (n <= 0) throw InvalidParams("gaussian_vec: dimension must be positive");
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    RealVec v(n);
    for (Index i = 0; i < n; ++i) v[i] = normal(gen);
    return v;
}

inline Point gaussian_point(Index n, std::uint64_t seed) {
    return Point(gaussian_vec(n, seed));
}

inline Point gaussian_cplx_point(Index n, std::uint64_t seed) {
    if (n <= 0) throw InvalidParams("gaussian_cplx_point: dimension must be positive");
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    CplxVec v(n);
    for (Index i = 0; i < n; ++i) {
        const double re = normal(gen);
        const double im = normal(gen);
        v[i] = Complex(re, im);
    }
    return Point(v);
}

/// Uniform draw from the closed ball of the given radius.
inline Point uniform_ball_point(Index n, double radius, std::uint64_t seed) {
    if (n <= 0) throw InvalidParams("uniform_ball_point: dimension must be positive");
    if (radius <= 0.0) throw InvalidParams("uniform_ball_point: radius must be positive");
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    RealVec dir(n);
    double nrm = 0.0;
    do {
        for (Index i = 0; i < n; ++i) dir[i] = normal(gen);
        nrm = dir.norm();
    } while (nrm == 0.0);
    const double r = radius * std::pow(unif(gen), 1.0 / static_cast<double>(n));
    return Point(RealVec(dir * (r / nrm)));
}

/// k distinct indices in [0, n), sorted ascending.
inline std::vector<Index> support_pattern(Index n, Index k, std::uint64_t seed) {
    if (n <= 0 || k < 1 || k > n) throw InvalidParams("support_pattern: need 1 <= k <= n");
    std::mt19937_64 gen(seed);
    std::vector<Index> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), Index{0});
    // Fisher-Yates prefix of length k.
    for (Index i = 0; i < k; ++i) {
        std::uniform_int_distribution<Index> pick(i, n - 1);
        std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(pick(gen))]);
    }
    all.resize(static_cast<std::size_t>(k));
    std::sort(all.begin(), all.end());
    return all;
}

/// Deterministic sub-seed derivation (splitmix64 step).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace rdr
