#pragma once

#include <array>
#include <cstdint>

namespace ergolab::rng {

// Counter-based generator: Philox4x32-10. A stream is a pure function of
// (master seed, replicate id, domain tag), so replicate fan-out needs no
// shared state and any position can be regenerated on demand.

struct PhiloxKey {
    std::uint32_t k0, k1;
};

// Domain tags keep the independent uses of a replicate's randomness on
// disjoint streams.
enum class Domain : std::uint32_t {
    noise = 0,       // path / chain innovations
    init = 1,        // initial-state draws
    probe = 2,       // sphere directions for condition checks
    centering = 3,   // auxiliary centering path
    cone = 4,        // restricted-eigenvalue cone sampling
    experiment = 5,  // experiment-level auxiliary draws
};

std::uint64_t splitmix64(std::uint64_t x);

PhiloxKey derive_key(std::uint64_t seed, std::uint64_t replicate_id, Domain domain);

// One Philox4x32-10 block: 128-bit counter -> 4 x 32-bit words.
std::array<std::uint32_t, 4> philox4x32(PhiloxKey key, std::uint64_t block,
                                        std::uint32_t ctr_hi = 0);

// Uniform in (0,1) from 64 bits (53-bit resolution, symmetric, never 0 or 1).
inline double u64_to_unit(std::uint64_t x) {
    return (static_cast<double>(x >> 11) + 0.5) * 0x1p-53;
}

// Inverse normal CDF, Acklam's rational approximation (|rel err| < 1.2e-9).
// Single code path shared by the scalar and vector kernels; the vector kernel
// falls back to this exact function for tail lanes.
double inverse_normal_cdf(double u);

inline double normal_from_u64(std::uint64_t bits) {
    return inverse_normal_cdf(u64_to_unit(bits));
}

// Sequential stream of standard normals. Two normals per Philox block.
class NormalStream {
public:
    NormalStream(std::uint64_t seed, std::uint64_t replicate_id, Domain domain)
        : key_(derive_key(seed, replicate_id, domain)) {}

    explicit NormalStream(PhiloxKey key) : key_(key) {}

    double next() {
        if (pos_ == 0) refill();
        double z = buf_[2 - pos_];
        --pos_;
        return z;
    }

    // 64 raw bits (for uniform draws / index sampling).
    std::uint64_t next_bits();

    double next_uniform() { return u64_to_unit(next_bits()); }

    // Uniform integer in [0, n) by rejection-free scaling (n << 2^64, the
    // modulo bias is far below statistical resolution here).
    std::uint64_t next_index(std::uint64_t n) { return next_bits() % n; }

    PhiloxKey key() const { return key_; }

private:
    void refill();

    PhiloxKey key_;
    std::uint64_t block_ = 0;       // next Philox block for normals
    std::uint64_t bits_block_ = 0;  // separate counter space for raw bits
    double buf_[2] = {0, 0};
    int pos_ = 0;
};

// Fills out[0..count) with the normals of the given stream starting at normal
// index `first` (normal i lives in block i/2, slot i%2). Dispatches to the
// active SIMD kernel; all variants produce identical bits.
void fill_normals(PhiloxKey key, std::uint64_t first, std::size_t count, double* out);

}  // namespace ergolab::rng
