#include "ergolab/rng.hpp"

#include <cmath>

#include "ergolab/errors.hpp"
#include "ergolab/kernels.hpp"

namespace ergolab::rng {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void philox_round(std::uint32_t& c0, std::uint32_t& c1, std::uint32_t& c2,
                         std::uint32_t& c3, std::uint32_t k0, std::uint32_t k1) {
    std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * c0;
    std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * c2;
    std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    std::uint32_t n0 = hi1 ^ c1 ^ k0;
    std::uint32_t n1 = lo1;
    std::uint32_t n2 = hi0 ^ c3 ^ k1;
    std::uint32_t n3 = lo0;
    c0 = n0;
    c1 = n1;
    c2 = n2;
    c3 = n3;
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

PhiloxKey derive_key(std::uint64_t seed, std::uint64_t replicate_id, Domain domain) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ (0xA0761D6478BD642Full * (replicate_id + 1)));
    h = splitmix64(h ^ (0xE7037ED1A0B428DBull * (static_cast<std::uint64_t>(domain) + 1)));
    return PhiloxKey{static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
}

std::array<std::uint32_t, 4> philox4x32(PhiloxKey key, std::uint64_t block,
                                        std::uint32_t ctr_hi) {
    std::uint32_t c0 = static_cast<std::uint32_t>(block);
    std::uint32_t c1 = static_cast<std::uint32_t>(block >> 32);
    std::uint32_t c2 = ctr_hi;
    std::uint32_t c3 = 0;
    std::uint32_t k0 = key.k0, k1 = key.k1;
    for (int r = 0; r < 10; ++r) {
        philox_round(c0, c1, c2, c3, k0, k1);
        k0 += kPhiloxW0;
        k1 += kPhiloxW1;
    }
    return {c0, c1, c2, c3};
}

double inverse_normal_cdf(double u) {
    // Acklam (2003). Central branch is polynomial-rational only, which the
    // AVX2 kernel reproduces verbatim; tails share this scalar code.
    static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                    -2.759285104469687e+02, 1.383577518672690e+02,
                                    -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                    -1.556989798598866e+02, 6.680131188771972e+01,
                                    -1.328068155288572e+01};
    static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                    -2.400758277161838e+00, -2.549732539343734e+00,
                                    4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                    2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    if (u < p_low) {
        double q = std::sqrt(-2.0 * std::log(u));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (u > 1.0 - p_low) {
        double q = std::sqrt(-2.0 * std::log(1.0 - u));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    double q = u - 0.5;
    double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

void NormalStream::refill() {
    auto w = philox4x32(key_, block_, /*ctr_hi=*/0);
    std::uint64_t u0 = (static_cast<std::uint64_t>(w[1]) << 32) | w[0];
    std::uint64_t u1 = (static_cast<std::uint64_t>(w[3]) << 32) | w[2];
    buf_[0] = normal_from_u64(u0);
    buf_[1] = normal_from_u64(u1);
    pos_ = 2;
    ++block_;
}

std::uint64_t NormalStream::next_bits() {
    // ctr_hi = 1 keeps raw-bit draws off the normals' counter space.
    auto w = philox4x32(key_, bits_block_, /*ctr_hi=*/1);
    ++bits_block_;
    return (static_cast<std::uint64_t>(w[1]) << 32) | w[0];
}

void fill_normals(PhiloxKey key, std::uint64_t first, std::size_t count, double* out) {
    simd::kernels().fill_normals(key, first, count, out);
}

}  // namespace ergolab::rng
