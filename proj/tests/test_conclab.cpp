#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "ergolab/conclab.hpp"
#include "ergolab/errors.hpp"
#include "ergolab/functionals.hpp"
#include "ergolab/sde.hpp"

using namespace ergolab;

TEST_CASE("tail table on a noiseless contraction is a step function") {
    // sigma = 0, b = -x: every replicate path is deterministic from its exact
    // draw being zero-noise... use a deterministic model with a fixed start.
    sde::DiffusionModel m;
    m.dim = 1;
    m.name = "det";
    m.drift = [](std::span<const double> x, std::span<double> out) { out[0] = -x[0]; };
    m.diffusion = [](std::span<const double>, std::span<double> out) { out[0] = 0.0; };
    m.erg.q = 0.0;
    m.erg.r = 1.0;
    auto f = functionals::function_by_name("x");
    f.centered_mean = 0.0;
    auto table = conclab::run_tail_experiment(m, f, 5.0, 128,
                                              conclab::StationaryInit::burnin(10.0), 3,
                                              {0.0, 1.0});
    // all paths identical (all start at ~0): |G| ~ 0, exceedance in {0,1}
    for (double p : table.exceed_fraction) CHECK((p == 0.0 || p == 1.0));
    CHECK(table.exceed_fraction[1] == 0.0);
}

TEST_CASE("OU tail experiment: variance of G_t(x) near 2 and monotone tails") {
    auto m = sde::make_ou(1);
    auto f = functionals::function_by_name("x");
    f.centered_mean = 0.0;
    auto table = conclab::run_tail_experiment(m, f, 50.0, 400,
                                              conclab::StationaryInit::auto_pick(), 11,
                                              {0.0, 0.5, 1.0, 2.0, 4.0}, 1e-2);
    CHECK(table.replicates == 400);
    // exceedance nonincreasing in the threshold
    for (std::size_t i = 1; i < table.exceed_fraction.size(); ++i)
        CHECK(table.exceed_fraction[i] <= table.exceed_fraction[i - 1]);
    // thresholds {0}: essentially every |G| is nonzero
    CHECK(table.exceed_fraction[0] == doctest::Approx(1.0));
    // sample variance of G within +-25% of 2 at this replicate count
    double s2 = 0.0;
    for (double v : table.values) s2 += v * v;
    s2 /= static_cast<double>(table.values.size());
    CHECK(s2 == doctest::Approx(2.0).epsilon(0.25));
    // reproducible under the same seed
    auto again = conclab::run_tail_experiment(m, f, 50.0, 400,
                                              conclab::StationaryInit::auto_pick(), 11,
                                              {0.0, 0.5, 1.0, 2.0, 4.0}, 1e-2);
    CHECK(again.values == table.values);
}

TEST_CASE("tail experiment refuses when more than 1% of paths diverge") {
    sde::DiffusionModel boom;
    boom.dim = 1;
    boom.name = "boom";
    boom.drift = [](std::span<const double> x, std::span<double> out) {
        out[0] = x[0] * x[0] * x[0];
    };
    boom.diffusion = [](std::span<const double>, std::span<double> out) { out[0] = 1.0; };
    boom.erg.q = 0.0;
    boom.erg.r = 1.0;
    auto f = functionals::function_by_name("x");
    f.centered_mean = 0.0;
    CHECK_THROWS_AS(conclab::run_tail_experiment(boom, f, 10.0, 100,
                                                 conclab::StationaryInit::burnin(0.5), 3,
                                                 {1.0}, 1.0),
                    numerical_error);
}

TEST_CASE("calibrate_W") {
    SUBCASE("degenerate all-zero table returns the grid minimum") {
        conclab::TailTable t;
        t.values.assign(200, 0.0);
        t.replicates = 200;
        std::vector<double> grid = {2.0, 3.0};
        CHECK(conclab::calibrate_W(t, 1.0, 2.5, grid) == doctest::Approx(1e-3));
    }
    SUBCASE("heavier tails never shrink W") {
        conclab::TailTable light, heavy;
        for (int i = 0; i < 500; ++i) {
            double u = (i + 0.5) / 500.0;
            double base = -std::log(u);  // Exp(1) quantiles
            light.values.push_back(base);
            heavy.values.push_back(2.0 * base);
        }
        std::sort(light.values.begin(), light.values.end());
        std::sort(heavy.values.begin(), heavy.values.end());
        light.replicates = heavy.replicates = 500;
        std::vector<double> grid = {2.0, 2.5, 3.0};
        double wl = conclab::calibrate_W(light, 1.0, 2.5, grid);
        double wh = conclab::calibrate_W(heavy, 1.0, 2.5, grid);
        CHECK(wh >= wl);
    }
    SUBCASE("u below 2 is rejected") {
        conclab::TailTable t;
        t.values.assign(200, 0.0);
        t.replicates = 200;
        std::vector<double> grid = {1.5};
        CHECK_THROWS_AS(conclab::calibrate_W(t, 1.0, 2.5, grid), argument_error);
    }
    SUBCASE("calibrated W re-validates on an independent table") {
        auto m = sde::make_ou(1);
        auto f = functionals::function_by_name("x");
        f.centered_mean = 0.0;
        std::vector<double> ugrid = {2.0, 2.5, 3.0};
        auto t1 = conclab::run_tail_experiment(m, f, 50.0, 500,
                                               conclab::StationaryInit::auto_pick(), 21,
                                               {1.0}, 1e-2);
        double st = bounds::rate_exponent(f.eta1, m.erg.q, m.erg.q_prime);
        double w = conclab::calibrate_W(t1, f.L, st, ugrid);
        CHECK(w > 0.0);
        auto t2 = conclab::run_tail_experiment(m, f, 50.0, 500,
                                               conclab::StationaryInit::auto_pick(), 22,
                                               {1.0}, 1e-2);
        int violations = 0;
        for (double u : ugrid) {
            double thr = M_E * f.L * w * std::pow(u, st);
            double p = t2.exceed_at(thr);
            double se = std::sqrt(std::max(p * (1.0 - p), 0.0) / 500.0);
            if (p > std::exp(-u) + 2.0 * se) ++violations;
        }
        // noisy near the envelope by construction; allow one marginal slip
        CHECK(violations <= 1);
    }
}

TEST_CASE("empirical moments") {
    SUBCASE("constants give |c| for every p") {
        std::vector<double> v(64, -2.5);
        std::vector<int> ps = {1, 2, 3, 4};
        for (auto [p, norm] : conclab::empirical_moments(v, ps))
            CHECK(norm == doctest::Approx(2.5));
    }
    SUBCASE("p = 2 is the RMS") {
        std::vector<double> v = {1.0, 2.0, 3.0};
        std::vector<int> ps = {2};
        auto out = conclab::empirical_moments(v, ps);
        CHECK(out[0].second == doctest::Approx(std::sqrt(14.0 / 3.0)));
    }
    SUBCASE("normal L4 norm ~ 3^{1/4} over 1e5 draws") {
        rng::NormalStream s(4, 0, rng::Domain::noise);
        std::vector<double> v(100000);
        for (auto& z : v) z = s.next();
        std::vector<int> ps = {4};
        auto out = conclab::empirical_moments(v, ps);
        CHECK(out[0].second == doctest::Approx(std::pow(3.0, 0.25)).epsilon(0.03));
    }
}

TEST_CASE("pac coverage") {
    bounds::PACRequest req{0.1, 0.1};
    SUBCASE("estimator equal to the target passes with full coverage") {
        auto rep = conclab::pac_coverage([](std::uint64_t, std::int64_t) { return 1.0; },
                                         1.0, req, 50, 1);
        CHECK(rep.within_eps == 50);
        CHECK(rep.pass);
    }
    SUBCASE("estimator two epsilons off fails with zero coverage") {
        auto rep = conclab::pac_coverage([](std::uint64_t, std::int64_t) { return 1.2; },
                                         1.0, req, 50, 1);
        CHECK(rep.within_eps == 0);
        CHECK(!rep.pass);
    }
    SUBCASE("verdict is a deterministic function of (eps, delta) on fixed data") {
        auto estimator = [](std::uint64_t, std::int64_t r) {
            return (r % 10 == 0) ? 2.0 : 1.0;  // 10% misses
        };
        bounds::PACRequest strict{0.1, 0.01};
        bounds::PACRequest lax{0.1, 0.3};
        auto a = conclab::pac_coverage(estimator, 1.0, strict, 100, 1);
        auto b = conclab::pac_coverage(estimator, 1.0, lax, 100, 1);
        CHECK(a.within_eps == b.within_eps);
        CHECK(!a.pass);
        CHECK(b.pass);
    }
    SUBCASE("too few runs are rejected") {
        CHECK_THROWS_AS(conclab::pac_coverage(
                            [](std::uint64_t, std::int64_t) { return 0.0; }, 0.0, req, 5, 1),
                        argument_error);
    }
}

TEST_CASE("emission embeds version and config and is stable") {
    conclab::TailTable t;
    t.thresholds = {1.0, 2.0};
    t.exceed_fraction = {0.5, 0.25};
    t.standard_errors = {0.05, 0.04};
    t.replicates = 100;
    nlohmann::json cfg{{"command", "conc-lab tails"}, {"seed", 7}};
    auto csv = conclab::tail_table_csv(t, cfg);
    CHECK(csv.find("# version: ergodic-lab") != std::string::npos);
    CHECK(csv.find("\"seed\":7") != std::string::npos);
    CHECK(csv.find("threshold,exceed_fraction,se") != std::string::npos);
    CHECK(csv == conclab::tail_table_csv(t, cfg));
    auto j = conclab::tail_table_json(t, cfg);
    CHECK(j["config"]["seed"] == 7);
    CHECK(j["data"]["replicates"] == 100);
}
