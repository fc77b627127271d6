#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "ergolab/kernels.hpp"
#include "ergolab/rng.hpp"

using namespace ergolab;

namespace {

std::vector<double> random_doubles(std::size_t n, std::uint64_t seed, double scale) {
    rng::NormalStream s(seed, 0, rng::Domain::experiment);
    std::vector<double> v(n);
    for (auto& x : v) x = scale * s.next();
    return v;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() &&
           std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("avx2 kernels match the scalar reference bit for bit") {
    if (!simd::avx2_available()) {
        MESSAGE("AVX2 unavailable; scalar-only host");
        return;
    }
    const auto& sc = simd::kernels_scalar();
    const auto& vx = *simd::kernels_avx2_or_null();

    SUBCASE("fill_normals across offsets and lengths") {
        auto key = rng::derive_key(31, 7, rng::Domain::noise);
        for (std::uint64_t first : {0ull, 1ull, 2ull, 15ull, 16ull, 33ull}) {
            for (std::size_t count : {1ul, 2ul, 3ul, 16ul, 17ul, 64ul, 255ul, 1000ul}) {
                std::vector<double> a(count), b(count);
                sc.fill_normals(key, first, count, a.data());
                vx.fill_normals(key, first, count, b.data());
                REQUIRE(bitwise_equal(a, b));
            }
        }
    }

    SUBCASE("euler_linear_step") {
        for (std::size_t n : {1ul, 3ul, 4ul, 7ul, 64ul, 129ul}) {
            auto x1 = random_doubles(n, 11, 2.0);
            auto x2 = x1;
            auto z = random_doubles(n, 12, 1.0);
            sc.euler_linear_step(x1.data(), z.data(), n, -1.0, 0.25, 1e-3,
                                 std::sqrt(1e-3), std::sqrt(2.0));
            vx.euler_linear_step(x2.data(), z.data(), n, -1.0, 0.25, 1e-3,
                                 std::sqrt(1e-3), std::sqrt(2.0));
            REQUIRE(bitwise_equal(x1, x2));
        }
    }

    SUBCASE("ula_qhalf_step") {
        for (std::size_t n : {1ul, 5ul, 64ul, 131ul}) {
            auto x1 = random_doubles(n, 21, 3.0);
            auto x2 = x1;
            auto z = random_doubles(n, 22, 1.0);
            sc.ula_qhalf_step(x1.data(), z.data(), n, 0.5, 1.0, 0.01, std::sqrt(0.02));
            vx.ula_qhalf_step(x2.data(), z.data(), n, 0.5, 1.0, 0.01, std::sqrt(0.02));
            REQUIRE(bitwise_equal(x1, x2));
        }
    }

    SUBCASE("accum_poly") {
        for (std::size_t n : {2ul, 4ul, 63ul, 257ul}) {
            auto acc1 = random_doubles(n, 31, 1.0);
            auto acc2 = acc1;
            auto x = random_doubles(n, 32, 2.0);
            sc.accum_poly(acc1.data(), x.data(), n, -1.0, 0.5, 1.0);
            vx.accum_poly(acc2.data(), x.data(), n, -1.0, 0.5, 1.0);
            REQUIRE(bitwise_equal(acc1, acc2));
        }
    }

    SUBCASE("gram_rank_update") {
        for (std::size_t n : {3ul, 8ul, 25ul, 26ul}) {
            for (std::size_t d : {1ul, 2ul, 5ul}) {
                auto g1 = random_doubles(n * n, 41, 1.0);
                auto g2 = g1;
                auto phi = random_doubles(n * d, 42, 1.0);
                sc.gram_rank_update(g1.data(), phi.data(), n, d);
                vx.gram_rank_update(g2.data(), phi.data(), n, d);
                REQUIRE(bitwise_equal(g1, g2));
            }
        }
    }
}

TEST_CASE("scalar reference semantics") {
    const auto& sc = simd::kernels_scalar();

    SUBCASE("euler step formula") {
        double x = 2.0, z = 0.5;
        sc.euler_linear_step(&x, &z, 1, -1.0, 0.0, 0.1, std::sqrt(0.1), 0.0);
        CHECK(x == doctest::Approx(1.8));  // deterministic Euler contraction
        x = 1.0;
        z = 1.0;
        sc.euler_linear_step(&x, &z, 1, 0.0, 0.0, 0.1, std::sqrt(0.1), 2.0);
        CHECK(x == doctest::Approx(1.0 + 2.0 * std::sqrt(0.1)));
    }

    SUBCASE("ula qhalf gradient matches the pow form") {
        double x = 1.7, z = 0.0;
        double x0 = x;
        double c = 0.5, s2 = 1.0, h = 0.01;
        sc.ula_qhalf_step(&x, &z, 1, c, s2, h, std::sqrt(2.0 * h));
        double g = c * x0 * std::pow(s2 + x0 * x0, -0.75);
        CHECK(x == doctest::Approx(x0 - h * g).epsilon(1e-12));
    }

    SUBCASE("accum_poly evaluates c0 + c1 x + c2 x^2") {
        double acc = 1.0, x = 3.0;
        sc.accum_poly(&acc, &x, 1, -1.0, 2.0, 1.0);
        CHECK(acc == doctest::Approx(1.0 + (-1.0 + 6.0 + 9.0)));
    }

    SUBCASE("gram update accumulates phi^T phi on the upper triangle") {
        std::vector<double> g(4, 0.0);
        std::vector<double> phi = {1.0, 2.0, 3.0, 4.0};  // 2x2: rows (1,2), (3,4)
        sc.gram_rank_update(g.data(), phi.data(), 2, 2);
        CHECK(g[0] == doctest::Approx(1.0 + 9.0));
        CHECK(g[1] == doctest::Approx(2.0 + 12.0));
        CHECK(g[3] == doctest::Approx(4.0 + 16.0));
        CHECK(g[2] == 0.0);  // lower triangle untouched
    }
}

TEST_CASE("forced level switching is honored") {
    auto initial = simd::active_level();
    simd::force_level(simd::Level::scalar);
    CHECK(simd::active_level() == simd::Level::scalar);
    if (simd::avx2_available()) {
        simd::force_level(simd::Level::avx2);
        CHECK(simd::active_level() == simd::Level::avx2);
    }
    simd::force_level(initial);
}
