#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "ergolab/errors.hpp"

namespace ergolab {

// Neumaier-compensated sum. Used for replicate reductions so results do not
// depend on chunking or thread count.
inline double neumaier_sum(std::span<const double> xs) {
    double s = 0.0, c = 0.0;
    for (double x : xs) {
        double t = s + x;
        if (std::fabs(s) >= std::fabs(x))
            c += (s - t) + x;
        else
            c += (x - t) + s;
        s = t;
    }
    return s + c;
}

inline double mean_compensated(std::span<const double> xs) {
    if (xs.empty()) throw argument_error("mean of empty sample");
    return neumaier_sum(xs) / static_cast<double>(xs.size());
}

inline bool all_finite(std::span<const double> xs) {
    for (double x : xs)
        if (!std::isfinite(x)) return false;
    return true;
}

inline double norm2(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// In-place LU solve with partial pivoting for small dense systems (d <= ~16).
// a is row-major d*d and gets destroyed; b holds the rhs and returns the
// solution. Throws numerical_error on (near-)singularity.
void lu_solve_inplace(std::vector<double>& a, std::span<double> b, int d);

// Solves a X = B for row-major a (d*d, destroyed) and B (d*m, destroyed,
// returns X).
void lu_solve_multi_inplace(std::vector<double>& a, std::span<double> b, int d, int m);

}  // namespace ergolab
