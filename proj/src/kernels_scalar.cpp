#include <cmath>

#include "ergolab/kernels.hpp"
#include "ergolab/rng.hpp"

// Reference kernels. These definitions are the semantics; the AVX2 variants
// must match them bit for bit (same op order, no FMA contraction).

namespace ergolab::simd {
namespace scalar {

void fill_normals(rng::PhiloxKey key, std::uint64_t first, std::size_t count,
                  double* out) {
    std::size_t i = 0;
    std::uint64_t idx = first;
    while (i < count) {
        auto w = rng::philox4x32(key, idx >> 1, 0);
        std::uint64_t u0 = (static_cast<std::uint64_t>(w[1]) << 32) | w[0];
        std::uint64_t u1 = (static_cast<std::uint64_t>(w[3]) << 32) | w[2];
        if ((idx & 1) == 0) {
            out[i++] = rng::normal_from_u64(u0);
            ++idx;
            if (i < count) {
                out[i++] = rng::normal_from_u64(u1);
                ++idx;
            }
        } else {
            out[i++] = rng::normal_from_u64(u1);
            ++idx;
        }
    }
}

void euler_linear_step(double* x, const double* z, std::size_t n, double a, double b,
                       double h, double sqrt_h, double sig) {
    for (std::size_t i = 0; i < n; ++i) {
        double zz = sqrt_h * z[i];
        double drift = a * x[i] + b;
        x[i] = (x[i] + h * drift) + sig * zz;
    }
}

void ula_qhalf_step(double* x, const double* z, std::size_t n, double c, double s2,
                    double h, double sqrt_2h) {
    for (std::size_t i = 0; i < n; ++i) {
        double w = s2 + x[i] * x[i];
        double sw = std::sqrt(w);
        double qw = std::sqrt(sw);
        double g = c * (x[i] / (sw * qw));  // c * x * w^{-3/4}
        double zz = sqrt_2h * z[i];
        x[i] = (x[i] - h * g) + zz;
    }
}

void accum_poly(double* acc, const double* x, std::size_t n, double c0, double c1,
                double c2) {
    for (std::size_t i = 0; i < n; ++i) {
        double t = x[i] * x[i];
        acc[i] += (c0 + c1 * x[i]) + c2 * t;
    }
}

void gram_rank_update(double* g, const double* phi, std::size_t n, std::size_t d) {
    for (std::size_t a = 0; a < d; ++a) {
        const double* row = phi + a * n;
        for (std::size_t i = 0; i < n; ++i) {
            double v = row[i];
            double* gi = g + i * n;
            for (std::size_t j = i; j < n; ++j) gi[j] += v * row[j];
        }
    }
}

}  // namespace scalar

const Kernels& kernels_scalar() {
    static const Kernels k = {
        &scalar::fill_normals, &scalar::euler_linear_step, &scalar::ula_qhalf_step,
        &scalar::accum_poly,   &scalar::gram_rank_update,
    };
    return k;
}

}  // namespace ergolab::simd
