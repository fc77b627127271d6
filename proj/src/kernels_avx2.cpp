// AVX2 variants of the reference kernels in kernels_scalar.cpp. Each one keeps
// the scalar op order (mul/add only, IEEE sqrt & div, inverse-CDF tails routed
// through the shared scalar code) so outputs are bit-identical across levels.

#ifdef __AVX2__

#include <immintrin.h>

#include <cstdint>
#include <cstring>

#include "ergolab/kernels.hpp"
#include "ergolab/rng.hpp"

namespace ergolab::simd {
namespace avx2 {

namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

// 32x32 -> 64 products for all eight 32-bit lanes, returned as (lo, hi) lanes.
inline void mul_hilo_epu32(__m256i a, std::uint32_t m, __m256i& lo, __m256i& hi) {
    const __m256i mv = _mm256_set1_epi32(static_cast<int>(m));
    __m256i prod_e = _mm256_mul_epu32(a, mv);                          // lanes 0,2,4,6
    __m256i prod_o = _mm256_mul_epu32(_mm256_srli_epi64(a, 32), mv);   // lanes 1,3,5,7
    lo = _mm256_blend_epi32(prod_e, _mm256_slli_epi64(prod_o, 32), 0xAA);
    hi = _mm256_blend_epi32(_mm256_srli_epi64(prod_e, 32), prod_o, 0xAA);
}

struct Philox8 {
    __m256i c0, c1, c2, c3;
};

// Ten Philox rounds on eight independent blocks (SoA lanes).
inline Philox8 philox8(rng::PhiloxKey key, std::uint64_t first_block) {
    alignas(32) std::uint32_t lo32[8], hi32[8];
    for (int i = 0; i < 8; ++i) {
        std::uint64_t b = first_block + static_cast<std::uint64_t>(i);
        lo32[i] = static_cast<std::uint32_t>(b);
        hi32[i] = static_cast<std::uint32_t>(b >> 32);
    }
    Philox8 s;
    s.c0 = _mm256_load_si256(reinterpret_cast<const __m256i*>(lo32));
    s.c1 = _mm256_load_si256(reinterpret_cast<const __m256i*>(hi32));
    s.c2 = _mm256_setzero_si256();
    s.c3 = _mm256_setzero_si256();
    std::uint32_t k0 = key.k0, k1 = key.k1;
    for (int r = 0; r < 10; ++r) {
        __m256i lo0, hi0, lo1, hi1;
        mul_hilo_epu32(s.c0, kM0, lo0, hi0);
        mul_hilo_epu32(s.c2, kM1, lo1, hi1);
        const __m256i k0v = _mm256_set1_epi32(static_cast<int>(k0));
        const __m256i k1v = _mm256_set1_epi32(static_cast<int>(k1));
        __m256i n0 = _mm256_xor_si256(_mm256_xor_si256(hi1, s.c1), k0v);
        __m256i n2 = _mm256_xor_si256(_mm256_xor_si256(hi0, s.c3), k1v);
        s.c0 = n0;
        s.c1 = lo1;
        s.c2 = n2;
        s.c3 = lo0;
        k0 += kW0;
        k1 += kW1;
    }
    return s;
}

// Exact u64 -> f64 for values < 2^53 (the shifted 53-bit uniforms).
inline __m256d u64_to_f64(__m256i v) {
    const __m256i lo_mask = _mm256_set1_epi64x(0xFFFFFFFFll);
    const __m256i magic_lo = _mm256_set1_epi64x(0x4330000000000000ll);  // 2^52
    const __m256i magic_hi = _mm256_set1_epi64x(0x4530000000000000ll);  // 2^84
    __m256i vlo = _mm256_or_si256(_mm256_and_si256(v, lo_mask), magic_lo);
    __m256i vhi = _mm256_or_si256(_mm256_srli_epi64(v, 32), magic_hi);
    const __m256d offset = _mm256_set1_pd(0x1p84 + 0x1p52);
    return _mm256_add_pd(_mm256_sub_pd(_mm256_castsi256_pd(vhi), offset),
                         _mm256_castsi256_pd(vlo));
}

// Central branch of Acklam's inverse CDF on four lanes; tail lanes are
// recomputed with the scalar routine on the exact same uniform.
inline __m256d inverse_normal4(__m256d u) {
    const __m256d half = _mm256_set1_pd(0.5);
    __m256d q = _mm256_sub_pd(u, half);
    __m256d r = _mm256_mul_pd(q, q);

    __m256d num = _mm256_set1_pd(-3.969683028665376e+01);
    num = _mm256_add_pd(_mm256_mul_pd(num, r), _mm256_set1_pd(2.209460984245205e+02));
    num = _mm256_add_pd(_mm256_mul_pd(num, r), _mm256_set1_pd(-2.759285104469687e+02));
    num = _mm256_add_pd(_mm256_mul_pd(num, r), _mm256_set1_pd(1.383577518672690e+02));
    num = _mm256_add_pd(_mm256_mul_pd(num, r), _mm256_set1_pd(-3.066479806614716e+01));
    num = _mm256_add_pd(_mm256_mul_pd(num, r), _mm256_set1_pd(2.506628277459239e+00));
    num = _mm256_mul_pd(num, q);

    __m256d den = _mm256_set1_pd(-5.447609879822406e+01);
    den = _mm256_add_pd(_mm256_mul_pd(den, r), _mm256_set1_pd(1.615858368580409e+02));
    den = _mm256_add_pd(_mm256_mul_pd(den, r), _mm256_set1_pd(-1.556989798598866e+02));
    den = _mm256_add_pd(_mm256_mul_pd(den, r), _mm256_set1_pd(6.680131188771972e+01));
    den = _mm256_add_pd(_mm256_mul_pd(den, r), _mm256_set1_pd(-1.328068155288572e+01));
    den = _mm256_add_pd(_mm256_mul_pd(den, r), _mm256_set1_pd(1.0));

    __m256d z = _mm256_div_pd(num, den);

    // |q| > 0.5 - p_low means the lane is in a tail.
    const __m256d lim = _mm256_set1_pd(0.5 - 0.02425);
    const __m256d absmask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7FFFFFFFFFFFFFFFll));
    __m256d aq = _mm256_and_pd(q, absmask);
    int tails = _mm256_movemask_pd(_mm256_cmp_pd(aq, lim, _CMP_GT_OQ));
    if (tails) {
        alignas(32) double uu[4], zz[4];
        _mm256_store_pd(uu, u);
        _mm256_store_pd(zz, z);
        for (int l = 0; l < 4; ++l)
            if (tails & (1 << l)) zz[l] = rng::inverse_normal_cdf(uu[l]);
        z = _mm256_load_pd(zz);
    }
    return z;
}

}  // namespace

void fill_normals(rng::PhiloxKey key, std::uint64_t first, std::size_t count,
                  double* out) {
    const Kernels& ref = kernels_scalar();
    std::size_t i = 0;
    // Scalar prefix until the normal index is block-aligned (even).
    if ((first & 1) && count > 0) {
        ref.fill_normals(key, first, 1, out);
        i = 1;
    }
    // Vector core: 8 blocks -> 16 normals per iteration.
    while (i + 16 <= count) {
        std::uint64_t idx = first + i;
        Philox8 s = philox8(key, idx >> 1);

        alignas(32) std::uint32_t w0[8], w1[8], w2[8], w3[8];
        _mm256_store_si256(reinterpret_cast<__m256i*>(w0), s.c0);
        _mm256_store_si256(reinterpret_cast<__m256i*>(w1), s.c1);
        _mm256_store_si256(reinterpret_cast<__m256i*>(w2), s.c2);
        _mm256_store_si256(reinterpret_cast<__m256i*>(w3), s.c3);

        alignas(32) std::uint64_t shifted[16];
        for (int b = 0; b < 8; ++b) {
            std::uint64_t u0 = (static_cast<std::uint64_t>(w1[b]) << 32) | w0[b];
            std::uint64_t u1 = (static_cast<std::uint64_t>(w3[b]) << 32) | w2[b];
            shifted[2 * b] = u0 >> 11;
            shifted[2 * b + 1] = u1 >> 11;
        }
        const __m256d halfv = _mm256_set1_pd(0.5);
        const __m256d scale = _mm256_set1_pd(0x1p-53);
        for (int g = 0; g < 4; ++g) {
            __m256i v =
                _mm256_load_si256(reinterpret_cast<const __m256i*>(shifted + 4 * g));
            __m256d u = _mm256_mul_pd(_mm256_add_pd(u64_to_f64(v), halfv), scale);
            _mm256_storeu_pd(out + i + 4 * g, inverse_normal4(u));
        }
        i += 16;
    }
    if (i < count) ref.fill_normals(key, first + i, count - i, out + i);
}

void euler_linear_step(double* x, const double* z, std::size_t n, double a, double b,
                       double h, double sqrt_h, double sig) {
    const __m256d av = _mm256_set1_pd(a);
    const __m256d bv = _mm256_set1_pd(b);
    const __m256d hv = _mm256_set1_pd(h);
    const __m256d sh = _mm256_set1_pd(sqrt_h);
    const __m256d sg = _mm256_set1_pd(sig);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d xv = _mm256_loadu_pd(x + i);
        __m256d zz = _mm256_mul_pd(sh, _mm256_loadu_pd(z + i));
        __m256d drift = _mm256_add_pd(_mm256_mul_pd(av, xv), bv);
        xv = _mm256_add_pd(_mm256_add_pd(xv, _mm256_mul_pd(hv, drift)),
                           _mm256_mul_pd(sg, zz));
        _mm256_storeu_pd(x + i, xv);
    }
    if (i < n) kernels_scalar().euler_linear_step(x + i, z + i, n - i, a, b, h, sqrt_h, sig);
}

void ula_qhalf_step(double* x, const double* z, std::size_t n, double c, double s2,
                    double h, double sqrt_2h) {
    const __m256d cv = _mm256_set1_pd(c);
    const __m256d s2v = _mm256_set1_pd(s2);
    const __m256d hv = _mm256_set1_pd(h);
    const __m256d s2h = _mm256_set1_pd(sqrt_2h);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d xv = _mm256_loadu_pd(x + i);
        __m256d w = _mm256_add_pd(s2v, _mm256_mul_pd(xv, xv));
        __m256d sw = _mm256_sqrt_pd(w);
        __m256d qw = _mm256_sqrt_pd(sw);
        __m256d g = _mm256_mul_pd(cv, _mm256_div_pd(xv, _mm256_mul_pd(sw, qw)));
        __m256d zz = _mm256_mul_pd(s2h, _mm256_loadu_pd(z + i));
        xv = _mm256_add_pd(_mm256_sub_pd(xv, _mm256_mul_pd(hv, g)), zz);
        _mm256_storeu_pd(x + i, xv);
    }
    if (i < n) kernels_scalar().ula_qhalf_step(x + i, z + i, n - i, c, s2, h, sqrt_2h);
}

void accum_poly(double* acc, const double* x, std::size_t n, double c0, double c1,
                double c2) {
    const __m256d c0v = _mm256_set1_pd(c0);
    const __m256d c1v = _mm256_set1_pd(c1);
    const __m256d c2v = _mm256_set1_pd(c2);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d xv = _mm256_loadu_pd(x + i);
        __m256d t = _mm256_mul_pd(xv, xv);
        __m256d v = _mm256_add_pd(_mm256_add_pd(c0v, _mm256_mul_pd(c1v, xv)),
                                  _mm256_mul_pd(c2v, t));
        _mm256_storeu_pd(acc + i, _mm256_add_pd(_mm256_loadu_pd(acc + i), v));
    }
    if (i < n) kernels_scalar().accum_poly(acc + i, x + i, n - i, c0, c1, c2);
}

void gram_rank_update(double* g, const double* phi, std::size_t n, std::size_t d) {
    for (std::size_t a = 0; a < d; ++a) {
        const double* row = phi + a * n;
        for (std::size_t i = 0; i < n; ++i) {
            const __m256d v = _mm256_set1_pd(row[i]);
            double* gi = g + i * n;
            std::size_t j = i;
            for (; j + 4 <= n; j += 4) {
                __m256d gv = _mm256_loadu_pd(gi + j);
                gv = _mm256_add_pd(gv, _mm256_mul_pd(v, _mm256_loadu_pd(row + j)));
                _mm256_storeu_pd(gi + j, gv);
            }
            for (; j < n; ++j) gi[j] += row[i] * row[j];
        }
    }
}

}  // namespace avx2

const Kernels* kernels_avx2_or_null() {
    static const Kernels k = {
        &avx2::fill_normals, &avx2::euler_linear_step, &avx2::ula_qhalf_step,
        &avx2::accum_poly,   &avx2::gram_rank_update,
    };
    return &k;
}

}  // namespace ergolab::simd

#else

#include "ergolab/kernels.hpp"

namespace ergolab::simd {
const Kernels* kernels_avx2_or_null() { return nullptr; }
}  // namespace ergolab::simd

#endif
