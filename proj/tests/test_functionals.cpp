#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "ergolab/errors.hpp"
#include "ergolab/functionals.hpp"
#include "ergolab/rng.hpp"
#include "ergolab/sde.hpp"

using namespace ergolab;
using functionals::TestFunction;

namespace {

sde::Trajectory constant_traj(double value, double step, std::int64_t n) {
    sde::Trajectory t;
    t.step = step;
    t.dim = 1;
    for (std::int64_t k = 0; k <= n; ++k) t.states.push_back(value);
    return t;
}

}  // namespace

TEST_CASE("continuous additive functional") {
    SUBCASE("zero integrand gives zero") {
        auto traj = constant_traj(2.0, 0.5, 8);
        auto f = functionals::make_poly(0.0, 0.0, 0.0, "zero");
        CHECK(functionals::continuous_additive(traj, f) == 0.0);
    }
    SUBCASE("unit integrand gives sqrt(t)") {
        auto traj = constant_traj(5.0, 0.5, 8);  // t = 4
        auto f = functionals::function_by_name("one");
        CHECK(functionals::continuous_additive(traj, f) == doctest::Approx(2.0));
    }
    SUBCASE("too-short trajectory is rejected") {
        sde::Trajectory t;
        t.step = 0.1;
        t.dim = 1;
        t.states = {1.0};
        auto f = functionals::function_by_name("one");
        CHECK_THROWS_AS(functionals::continuous_additive(t, f), argument_error);
    }
    SUBCASE("coarse value matches the refined recomputation of the same path") {
        // The same Brownian path at delta = 1e-2 and 1e-4: the coarse grid's
        // increments are block sums of the fine stream, so both paths share
        // one noise realization and the functionals differ only by the
        // discretization error.
        auto m = sde::make_ou(1);
        const double fine = 1e-4, coarse = 1e-2;
        const std::int64_t blow = 100;
        const double T = 20.0;
        const auto n_coarse = static_cast<std::int64_t>(std::llround(T / coarse));
        auto f = functionals::function_by_name("x");

        auto traj_fine = sde::euler_maruyama(m, std::vector<double>{0.5}, fine,
                                             n_coarse * blow, 2718, 0);
        double g_fine = functionals::continuous_additive(traj_fine, f);

        rng::NormalStream stream(2718, 0, rng::Domain::noise);
        sde::Trajectory traj_coarse;
        traj_coarse.step = coarse;
        traj_coarse.dim = 1;
        double x = 0.5;
        traj_coarse.states.push_back(x);
        const double root_fine = std::sqrt(fine);
        for (std::int64_t k = 0; k < n_coarse; ++k) {
            double dw = 0.0;
            for (std::int64_t j = 0; j < blow; ++j) dw += root_fine * stream.next();
            x = x + coarse * (-x) + std::sqrt(2.0) * dw;
            traj_coarse.states.push_back(x);
        }
        double g_coarse = functionals::continuous_additive(traj_coarse, f);
        CHECK(std::fabs(g_coarse - g_fine) <= 0.05);
    }
}

TEST_CASE("discrete additive functional") {
    auto one = functionals::function_by_name("one");
    SUBCASE("unit function, n=4, Delta=1") {
        std::vector<double> samples = {1.0, 2.0, 3.0, 4.0};
        CHECK(functionals::discrete_additive(samples, 1, 1.0, one) ==
              doctest::Approx(2.0));
    }
    SUBCASE("single sample arithmetic") {
        std::vector<double> samples = {2.0};
        auto f = functionals::function_by_name("x2");
        CHECK(functionals::discrete_additive(samples, 1, 1.0, f) == doctest::Approx(4.0));
    }
    SUBCASE("empty sample is rejected") {
        std::vector<double> samples;
        CHECK_THROWS_AS(functionals::discrete_additive(samples, 1, 1.0, one),
                        argument_error);
    }
}

TEST_CASE("burn-in averages") {
    SUBCASE("constant function averages to itself") {
        auto traj = constant_traj(3.0, 0.25, 40);
        auto f = functionals::make_poly(7.5, 0.0, 0.0, "c");
        CHECK(functionals::burnin_average_continuous(traj, 1.0, 5.0, f) ==
              doctest::Approx(7.5));
    }
    SUBCASE("v = 0 ties back to the scaled additive functional") {
        auto m = sde::make_ou(1);
        auto traj = sde::euler_maruyama(m, std::vector<double>{0.2}, 0.01, 400, 5, 0);
        auto f = functionals::function_by_name("x2");
        double t = traj.horizon();
        double lhs = functionals::burnin_average_continuous(traj, 0.0, t, f);
        double rhs = functionals::continuous_additive(traj, f) / std::sqrt(t);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
    SUBCASE("window exceeding the trajectory is rejected") {
        auto traj = constant_traj(0.0, 0.5, 10);  // covers [0, 5]
        auto f = functionals::function_by_name("one");
        CHECK_THROWS_AS(functionals::burnin_average_continuous(traj, 2.0, 4.0, f),
                        argument_error);
    }
    SUBCASE("discrete burn-in mean: constants, m=0 reduction, bounds") {
        std::vector<double> samples = {1.0, 2.0, 3.0, 4.0, 5.0};
        auto f = functionals::function_by_name("x");
        CHECK(functionals::burnin_average_discrete(samples, 1, 0.1, 0, 5, f) ==
              doctest::Approx(3.0));
        CHECK(functionals::burnin_average_discrete(samples, 1, 0.1, 2, 3, f) ==
              doctest::Approx(4.0));
        CHECK_THROWS_AS(functionals::burnin_average_discrete(samples, 1, 0.1, 3, 3, f),
                        argument_error);
    }
    SUBCASE("OU x^2 window average concentrates near 1 (3-sigma CLT band)") {
        // asymptotic variance of the x^2 average is 2/t
        auto m = sde::make_ou(1);
        const double v = 2.0, t = 50.0, h = 1e-2;
        auto f = functionals::function_by_name("x2");
        int within = 0;
        const int runs = 40;
        const double band = 3.0 * std::sqrt(2.0 / t);
        for (int r = 0; r < runs; ++r) {
            auto traj = sde::euler_maruyama(
                m, sde::sample_stationary(m, sde::StationaryMethod::exact(), 33, r), h,
                static_cast<std::int64_t>((v + t) / h), 33, r);
            double a = functionals::burnin_average_continuous(traj, v, t, f);
            if (std::fabs(a - 1.0) <= band) ++within;
        }
        CHECK(within >= 38);  // ~99.7% per run
    }
}

TEST_CASE("linearity and range invariants") {
    auto m = sde::make_ou(1);
    auto traj = sde::euler_maruyama(m, std::vector<double>{1.0}, 0.01, 500, 8, 0);
    auto fx = functionals::function_by_name("x");
    auto fx2 = functionals::function_by_name("x2");
    TestFunction combo = functionals::make_poly(0.0, 2.5, -1.5, "combo");
    double lhs = functionals::continuous_additive(traj, combo);
    double rhs = 2.5 * functionals::continuous_additive(traj, fx) -
                 1.5 * functionals::continuous_additive(traj, fx2);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));

    // scaling is exact to 1e-12 relative
    TestFunction scaled = functionals::make_poly(0.0, 5.0, 0.0, "5x");
    CHECK(functionals::continuous_additive(traj, scaled) ==
          doctest::Approx(5.0 * functionals::continuous_additive(traj, fx))
              .epsilon(1e-12));

    // burn-in average lies between min and max of f on the visited states
    double lo = 1e300, hi = -1e300;
    for (std::size_t k = 0; k <= 500; ++k) {
        double v = fx2.eval(traj.state(k));
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    double avg = functionals::burnin_average_continuous(traj, 0.0, 5.0, fx2);
    CHECK(avg >= lo);
    CHECK(avg <= hi);
}

TEST_CASE("growth certificate check") {
    auto f = functionals::function_by_name("x2");
    CHECK_NOTHROW(functionals::check_growth(f, 1));
    TestFunction liar = functionals::function_by_name("x4");
    liar.eta1 = 1.0;  // claims linear growth
    CHECK_THROWS_AS(functionals::check_growth(liar, 1), argument_error);
}

TEST_CASE("default poisson horizon covers six relaxation scales") {
    auto m = sde::make_ou(1);  // iota' = 0.25 here, so 6/iota' = 24 binds
    CHECK(functionals::default_poisson_horizon(m) ==
          doctest::Approx(std::max(12.0, 6.0 / sde::iota_prime(m.erg))));
    auto fast = sde::make_ou(1, /*theta=*/4.0);  // iota' = 4 -> the floor binds
    CHECK(functionals::default_poisson_horizon(fast) == doctest::Approx(12.0));
}

TEST_CASE("poisson potential estimates") {
    auto m = sde::make_ou(1);
    SUBCASE("zero function gives zero with zero error") {
        auto f = functionals::make_poly(0.0, 0.0, 0.0, "zero");
        f.centered_mean = 0.0;
        auto est = functionals::estimate_poisson_potential(m, f, std::vector<double>{1.0},
                                                           4.0, 200, 1);
        CHECK(est.estimate == 0.0);
        CHECK(est.std_error == 0.0);
        CHECK(!est.warning);
    }
    SUBCASE("L^{-1}[x](1) = -1 within 3 SE") {
        auto f = functionals::function_by_name("x");
        f.centered_mean = 0.0;
        auto est = functionals::estimate_poisson_potential(m, f, std::vector<double>{1.0},
                                                           12.0, 4000, 20240801);
        CHECK(std::fabs(est.estimate - (-1.0)) <= 3.0 * est.std_error);
    }
    SUBCASE("L^{-1}[x^2-1](2) = -1.5 within 3 SE") {
        auto f = functionals::function_by_name("x2c");
        f.centered_mean = 0.0;
        auto est = functionals::estimate_poisson_potential(m, f, std::vector<double>{2.0},
                                                           12.0, 4000, 20240801);
        CHECK(std::fabs(est.estimate - (-1.5)) <= 3.0 * est.std_error);
    }
    SUBCASE("generic path agrees with the batch fast path bitwise") {
        auto f = functionals::function_by_name("x");
        f.centered_mean = 0.0;
        auto fast = functionals::estimate_poisson_potential(
            m, f, std::vector<double>{1.0}, 2.0, 64, 5);
        auto generic = m;
        generic.linear1d.reset();
        auto slow = functionals::estimate_poisson_potential(
            generic, f, std::vector<double>{1.0}, 2.0, 64, 5);
        CHECK(fast.estimate == slow.estimate);
        CHECK(fast.std_error == slow.std_error);
    }
    SUBCASE("plug-in centering kicks in when no mean is registered") {
        auto f = functionals::function_by_name("x2c");  // true mu(f) = 0 under OU
        REQUIRE(!f.centered_mean);
        auto est = functionals::estimate_poisson_potential(m, f, std::vector<double>{2.0},
                                                           12.0, 2000, 9);
        // the plug-in path equals passing the plug-in mean explicitly
        auto g = f;
        g.centered_mean = functionals::plugin_mean(m, f, 9);
        auto ref = functionals::estimate_poisson_potential(m, g, std::vector<double>{2.0},
                                                           12.0, 2000, 9);
        CHECK(est.estimate == ref.estimate);
        CHECK(est.std_error == ref.std_error);
        // a mean error dmu shifts the potential by dmu * horizon, so the
        // plug-in estimate only lands within ~ 3 * horizon * sd(mu_hat) of
        // the analytic value (sd(mu_hat) ~ sqrt(2/100) here)
        CHECK(std::fabs(est.estimate - (-1.5)) < 3.0 * 12.0 * std::sqrt(2.0 / 100.0));
    }
    SUBCASE("explosive model: every path diverges and the estimate is refused") {
        sde::DiffusionModel boom;
        boom.dim = 1;
        boom.name = "boom";
        boom.drift = [](std::span<const double> x, std::span<double> out) {
            out[0] = x[0] * x[0] * x[0];
        };
        boom.diffusion = [](std::span<const double>, std::span<double> out) {
            out[0] = 0.0;
        };
        boom.erg.q = 0.0;
        boom.erg.r = 1.0;
        auto f = functionals::function_by_name("x");
        f.centered_mean = 0.0;
        CHECK_THROWS_AS(functionals::estimate_poisson_potential(
                            boom, f, std::vector<double>{10.0}, 5.0, 50, 1, 1.0),
                        numerical_error);
    }
    SUBCASE("discrete burn-in OU average stays in the CLT band across runs") {
        // m = 200, n = 1e4, Delta = 0.05: the average of x over the window has
        // sd ~ sqrt(2/(n Delta)) = 0.063, so the 3-sigma band is +-0.19
        auto m2 = sde::make_ou(1);
        auto fx = functionals::function_by_name("x");
        const double Delta = 0.05;
        int within = 0;
        const int runs = 40;
        for (int r = 0; r < runs; ++r) {
            auto x0 = sde::sample_stationary(m2, sde::StationaryMethod::exact(), 61, r);
            auto traj = sde::euler_maruyama(m2, x0, Delta, 10200, 61, r);
            double v = functionals::burnin_average_discrete(
                std::span<const double>{traj.states.data() + 1, 10200}, 1, Delta, 200,
                10000, fx);
            if (std::fabs(v) <= 0.19) ++within;
        }
        CHECK(within >= 38);
    }
    SUBCASE("poisson identity spot-check at three probe points") {
        auto fx = functionals::function_by_name("x");
        fx.centered_mean = 0.0;
        auto fx2 = functionals::function_by_name("x2c");
        fx2.centered_mean = 0.0;
        for (double x0 : {-1.0, 0.5, 2.0}) {
            auto ex = functionals::estimate_poisson_potential(
                m, fx, std::vector<double>{x0}, 12.0, 4000, 20240801);
            CHECK(std::fabs(ex.estimate - (-x0)) <= 3.0 * std::max(ex.std_error, 1e-3));
            auto ex2 = functionals::estimate_poisson_potential(
                m, fx2, std::vector<double>{x0}, 12.0, 4000, 20240801);
            double target = -(x0 * x0 - 1.0) / 2.0;
            CHECK(std::fabs(ex2.estimate - target) <= 3.0 * std::max(ex2.std_error, 1e-3));
        }
    }
}
