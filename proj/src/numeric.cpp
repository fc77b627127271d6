#include "ergolab/numeric.hpp"

#include <algorithm>
#include <cmath>

namespace ergolab {

void lu_solve_multi_inplace(std::vector<double>& a, std::span<double> b, int d, int m) {
    for (int k = 0; k < d; ++k) {
        int piv = k;
        double best = std::fabs(a[k * d + k]);
        for (int i = k + 1; i < d; ++i) {
            double v = std::fabs(a[i * d + k]);
            if (v > best) {
                best = v;
                piv = i;
            }
        }
        if (!(best > 0.0) || !std::isfinite(best))
            throw numerical_error("singular matrix in lu_solve");
        if (piv != k) {
            for (int j = 0; j < d; ++j) std::swap(a[k * d + j], a[piv * d + j]);
            for (int j = 0; j < m; ++j) std::swap(b[k * m + j], b[piv * m + j]);
        }
        double inv = 1.0 / a[k * d + k];
        for (int i = k + 1; i < d; ++i) {
            double f = a[i * d + k] * inv;
            a[i * d + k] = 0.0;
            for (int j = k + 1; j < d; ++j) a[i * d + j] -= f * a[k * d + j];
            for (int j = 0; j < m; ++j) b[i * m + j] -= f * b[k * m + j];
        }
    }
    for (int k = d - 1; k >= 0; --k) {
        double inv = 1.0 / a[k * d + k];
        for (int j = 0; j < m; ++j) {
            double s = b[k * m + j];
            for (int i = k + 1; i < d; ++i) s -= a[k * d + i] * b[i * m + j];
            b[k * m + j] = s * inv;
        }
    }
}

void lu_solve_inplace(std::vector<double>& a, std::span<double> b, int d) {
    lu_solve_multi_inplace(a, b, d, 1);
}

}  // namespace ergolab
