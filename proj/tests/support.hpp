#pragma once

#include "mmreach/geometry.hpp"
#include "mmreach/types.hpp"

#include <cstdint>
#include <random>

namespace testing {

using mmreach::Box;
using mmreach::Matrix;
using mmreach::Vector;

inline Vector v2(double a, double b) { return Vector{{a, b}}; }
inline Vector v1(double a) { return Vector::Constant(1, a); }

inline Matrix m2(double a, double b, double c, double d)
{
    Matrix t(2, 2);
    t << a, b, c, d;
    return t;
}

struct Rng {
    std::mt19937_64 gen;
    explicit Rng(std::uint64_t seed) : gen(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen); }

    Vector in(const Box& b)
    {
        Vector x(b.dim());
        for (Eigen::Index j = 0; j < b.dim(); ++j)
            x[j] = uniform(b.lo()[j], b.hi()[j]);
        return x;
    }

    /// Random ordered pair (a <= b) in the box.
    std::pair<Vector, Vector> ordered(const Box& box)
    {
        Vector a = in(box), b = in(box);
        return {a.cwiseMin(b), a.cwiseMax(b)};
    }
};

} // namespace testing
