#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "ergolab/rng.hpp"

namespace ergolab::simd {

enum class Level { scalar = 0, avx2 = 1 };

// Active kernel set: picked once from CPUID, overridable with
// ERGOLAB_SIMD=scalar|avx2|auto.
Level active_level();
const char* level_name(Level level);

// Forces a level (throws if unsupported). Intended for tests.
void force_level(Level level);

// ---------------------------------------------------------------------------
// Kernel table. Scalar versions are the reference semantics; vector versions
// must return bit-identical results (enforced by tests/test_kernels.cpp).
// All kernels keep a fixed evaluation order per element:
//   euler linear step:   zz = sqrt_h*z;  x' = (x + h*(a*x + b)) + sig*zz
//   ula q=1/2 step:      w = s2 + x*x;  g = c*(x/(sqrt(w)*sqrt(sqrt(w))));
//                        zz = sqrt_2h*z;  x' = (x - h*g) + zz
//   poly accumulate:     acc += (c0 + c1*x) + c2*(x*x)
//   gram rank-d update:  G[i,j] += phi[a,i]*phi[a,j], a-major
// ---------------------------------------------------------------------------

struct Kernels {
    // Philox normals: writes normals with indices [first, first+count).
    void (*fill_normals)(rng::PhiloxKey key, std::uint64_t first, std::size_t count,
                         double* out);

    // One Euler step for n independent scalar states with linear drift a*x+b
    // and constant diffusion sig.
    void (*euler_linear_step)(double* x, const double* z, std::size_t n, double a,
                              double b, double h, double sqrt_h, double sig);

    // One ULA step for n states under U'(x) = c * x / (s2+x^2)^{3/4}
    // (the q = 1/2 heavy-tailed gradient; uses only sqrt/div so the vector
    // variant stays bit-exact).
    void (*ula_qhalf_step)(double* x, const double* z, std::size_t n, double c,
                           double s2, double h, double sqrt_2h);

    // acc[i] += c0 + c1*x[i] + c2*x[i]^2
    void (*accum_poly)(double* acc, const double* x, std::size_t n, double c0, double c1,
                       double c2);

    // Symmetric rank-d update of the packed upper triangle
    // (row-major, G[i*n+j], j >= i): G += phi^T phi for phi (d x n, row-major).
    void (*gram_rank_update)(double* g, const double* phi, std::size_t n, std::size_t d);
};

const Kernels& kernels();          // active set
const Kernels& kernels_scalar();   // reference set
bool avx2_available();
const Kernels* kernels_avx2_or_null();

}  // namespace ergolab::simd
