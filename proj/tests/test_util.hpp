#pragma once

#include <cstdint>

#include "qpsl2/mat2.hpp"
#include "qpsl2/sl2.hpp"

// Shared test helpers: a platform-stable PRNG and generators for random
// unimodular matrices and cone vectors.

namespace testutil {

struct Rng {
    std::uint64_t state;
    explicit Rng(std::uint64_t seed) : state(seed) {}

    std::uint64_t next_u64() {
        // splitmix64
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    double uniform() { return (next_u64() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
};

// Random element of SL(2,R) as exp of a random traceless matrix.
inline qpsl2::Mat2R random_unimodular(Rng& rng, double scale = 1.0) {
    const qpsl2::AlgebraVector v{rng.uniform(-scale, scale), rng.uniform(-scale, scale),
                                 rng.uniform(-scale, scale)};
    return qpsl2::exp_traceless(v.matrix());
}

// Random vector in the strict cone E+_delta.
inline qpsl2::AlgebraVector random_cone_vector(Rng& rng, double delta, double scale = 1.0) {
    const double x = rng.uniform(-scale, scale);
    const double y = rng.uniform(-scale, scale);
    const double r = std::hypot(x, y);
    const double z = (1.0 + delta) * r + rng.uniform(0.0, scale) + 1e-3;
    return {x, y, z};
}

inline double golden() { return 0.6180339887498948482; }  // (sqrt 5 - 1)/2
inline double sqrt2m1() { return 0.41421356237309503; }   // sqrt 2 - 1
inline double sqrt5m2() { return 0.2360679774997896964; } // sqrt 5 - 2, CF [0;4,4,4,...]

}  // namespace testutil
