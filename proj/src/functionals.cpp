#include "ergolab/functionals.hpp"

#include <cmath>

#include "ergolab/errors.hpp"
#include "ergolab/numeric.hpp"

namespace ergolab::functionals {

TestFunction make_poly(double c0, double c1, double c2, std::string name) {
    TestFunction f;
    engine::PolyF p{c0, c1, c2};
    f.poly = p;
    f.eval = [p](std::span<const double> x) { return p(x[0]); };
    f.name = std::move(name);
    f.eta1 = c2 != 0.0 ? 2.0 : (c1 != 0.0 ? 1.0 : 0.0);
    f.L = std::fabs(c0) + std::fabs(c1) + std::fabs(c2);
    if (f.L == 0.0) f.L = 1.0;
    f.eta2 = c2 != 0.0 ? 1.0 : 0.0;
    f.eta3 = 0.0;
    return f;
}

TestFunction function_by_name(const std::string& name) {
    if (name == "one") {
        auto f = make_poly(1.0, 0.0, 0.0, "one");
        return f;
    }
    if (name == "x") {
        auto f = make_poly(0.0, 1.0, 0.0, "x");
        return f;
    }
    if (name == "x2") {
        TestFunction f;
        engine::PolyF p{0.0, 0.0, 1.0};
        f.poly = p;
        f.eval = [](std::span<const double> x) {
            double s = 0.0;
            for (double v : x) s += v * v;
            return s;
        };
        f.name = "x2";
        f.eta1 = 2.0;
        f.L = 1.0;
        f.eta2 = 1.0;
        f.eta3 = 0.0;
        return f;
    }
    if (name == "x2c") {
        auto f = make_poly(-1.0, 0.0, 1.0, "x2c");
        f.L = 1.0;  // |x^2 - 1| <= 1 + |x|^2
        return f;
    }
    if (name == "x4") {
        TestFunction f;
        f.eval = [](std::span<const double> x) {
            double s = 0.0;
            for (double v : x) s += v * v;
            return s * s;
        };
        f.name = "x4";
        f.eta1 = 4.0;
        f.L = 1.0;
        f.eta2 = 3.0;
        f.eta3 = 2.0;
        return f;
    }
    if (name == "abs") {
        TestFunction f;
        f.eval = [](std::span<const double> x) { return norm2(x); };
        f.name = "abs";
        f.eta1 = 1.0;
        f.L = 1.0;
        f.eta2 = 0.0;
        f.eta3 = 0.0;
        return f;
    }
    throw argument_error("unknown test function '" + name + "'");
}

std::vector<std::string> registered_functions() {
    return {"one", "x", "x2", "x2c", "x4", "abs"};
}

void check_growth(const TestFunction& f, int dim, double radius, int n_probes,
                  std::uint64_t seed) {
    rng::NormalStream stream(seed, 0, rng::Domain::probe);
    std::vector<double> x(static_cast<std::size_t>(dim));
    for (int i = 0; i < n_probes; ++i) {
        double r = radius * stream.next_uniform();
        double n = 0.0;
        for (auto& v : x) {
            v = stream.next();
            n += v * v;
        }
        n = std::sqrt(n);
        if (n > 0)
            for (auto& v : x) v *= r / n;
        double fx = f.eval(x);
        if (!std::isfinite(fx))
            throw numerical_error("test function non-finite on probe");
        double bound = f.L * (1.0 + std::pow(r, f.eta1));
        if (std::fabs(fx) > bound * (1.0 + 1e-12))
            throw argument_error("test function violates growth certificate at |x|=" +
                                 std::to_string(r));
    }
}

namespace {

double sum_f_over_rows(std::span<const double> rows, int dim, std::size_t first,
                       std::size_t count, const TestFunction& f) {
    double s = 0.0;
    if (dim == 1 && f.poly) {
        const engine::PolyF p = *f.poly;
        for (std::size_t k = 0; k < count; ++k) s += p(rows[first + k]);
        return s;
    }
    for (std::size_t k = 0; k < count; ++k) {
        std::span<const double> x{rows.data() + (first + k) * static_cast<std::size_t>(dim),
                                  static_cast<std::size_t>(dim)};
        double v = f.eval(x);
        if (!std::isfinite(v))
            throw numerical_error("non-finite functional value at sample " +
                                  std::to_string(first + k));
        s += v;
    }
    return s;
}

}  // namespace

double continuous_additive(const sde::Trajectory& traj, const TestFunction& f) {
    if (traj.n_states() < 2)
        throw argument_error("continuous_additive: trajectory needs >= 2 states");
    const double t = traj.horizon();
    double s = sum_f_over_rows(traj.states, traj.dim, 0, traj.n_steps(), f);
    if (!std::isfinite(s)) throw numerical_error("non-finite functional value on path");
    return s * traj.step / std::sqrt(t);
}

double discrete_additive(std::span<const double> samples, int dim, double delta,
                         const TestFunction& f) {
    if (samples.empty() || dim < 1) throw argument_error("discrete_additive: empty sample");
    if (!(delta > 0.0)) throw argument_error("discrete_additive: delta must be > 0");
    const std::size_t n = samples.size() / static_cast<std::size_t>(dim);
    double s = sum_f_over_rows(samples, dim, 0, n, f);
    if (!std::isfinite(s)) throw numerical_error("non-finite functional value in sample");
    return s * delta / std::sqrt(static_cast<double>(n) * delta);
}

double burnin_average_continuous(const sde::Trajectory& traj, double v, double t,
                                 const TestFunction& f) {
    if (!(v >= 0.0) || !(t > 0.0))
        throw argument_error("burnin_average_continuous: need v >= 0 and t > 0");
    const auto k0 = static_cast<std::int64_t>(std::llround(v / traj.step));
    const auto nwin = static_cast<std::int64_t>(std::llround(t / traj.step));
    if (nwin < 1) throw argument_error("burnin_average_continuous: window shorter than step");
    if (static_cast<std::size_t>(k0 + nwin) > traj.n_steps())
        throw argument_error("burnin_average_continuous: trajectory does not cover [0, v+t]");
    double s = sum_f_over_rows(traj.states, traj.dim, static_cast<std::size_t>(k0),
                               static_cast<std::size_t>(nwin), f);
    return s * traj.step / t;
}

double burnin_average_discrete(std::span<const double> samples, int dim, double delta,
                               std::int64_t m, std::int64_t n, const TestFunction& f) {
    (void)delta;
    if (dim < 1) throw argument_error("burnin_average_discrete: dim >= 1");
    if (m < 0 || n < 1) throw argument_error("burnin_average_discrete: need m >= 0, n >= 1");
    const auto len = static_cast<std::int64_t>(samples.size() / static_cast<std::size_t>(dim));
    if (len < m + n)
        throw argument_error("burnin_average_discrete: need at least m+n samples");
    double s = sum_f_over_rows(samples, dim, static_cast<std::size_t>(m),
                               static_cast<std::size_t>(n), f);
    return s / static_cast<double>(n);
}

double plugin_mean(const sde::DiffusionModel& model, const TestFunction& f,
                   std::uint64_t seed, std::int64_t n_steps, double step) {
    std::vector<double> x0(static_cast<std::size_t>(model.dim), 0.0);
    if (model.has_exact_sampler())
        x0 = sde::sample_stationary(model, sde::StationaryMethod::exact(), seed ^ 0x5eedull,
                                    /*replicate_id=*/-1);
    // The centering path runs on its own derived seed so it can never alias a
    // replicate's noise stream.
    std::uint64_t aux_seed = rng::splitmix64(seed ^ 0xCE27E21ull);
    if (model.dim == 1 && model.linear1d && f.poly) {
        std::span<const double> x0s{x0.data(), 1};
        auto res = engine::run_linear1d(*model.linear1d, x0s, step, 0, n_steps, *f.poly,
                                        aux_seed, 0, 1, 1);
        if (res.diverged) throw numerical_error("centering path diverged");
        return res.sums[0] / static_cast<double>(n_steps);
    }
    auto res = engine::run_model_stream(
        model, x0, step, 0, n_steps, [&](std::span<const double> y) { return f.eval(y); },
        aux_seed, 0);
    if (res.diverged) throw numerical_error("centering path diverged");
    return res.sum / static_cast<double>(n_steps);
}

double default_poisson_horizon(const sde::DiffusionModel& model) {
    return std::max(12.0, 6.0 / sde::iota_prime(model.erg));
}

PotentialEstimate estimate_poisson_potential(const sde::DiffusionModel& model,
                                             const TestFunction& f,
                                             std::span<const double> x, double horizon,
                                             std::int64_t replicates, std::uint64_t seed,
                                             double step, int threads) {
    if (!(horizon > 0.0)) throw argument_error("poisson potential: horizon must be > 0");
    if (replicates < 1) throw argument_error("poisson potential: replicates >= 1");
    if (static_cast<int>(x.size()) != model.dim)
        throw argument_error("poisson potential: x dimension mismatch");

    const double mu = f.centered_mean ? *f.centered_mean : plugin_mean(model, f, seed);
    const auto n_steps = static_cast<std::int64_t>(std::llround(horizon / step));

    std::vector<double> integrals;
    integrals.reserve(static_cast<std::size_t>(replicates));
    std::int64_t excluded = 0;

    if (model.dim == 1 && model.linear1d && f.poly) {
        engine::PolyF p = *f.poly;
        p.c0 -= mu;
        std::vector<double> x0(static_cast<std::size_t>(replicates), x[0]);
        auto res = engine::run_linear1d(*model.linear1d, x0, step, 0, n_steps, p, seed, 0,
                                        replicates, threads);
        excluded = res.diverged;
        for (double s : res.sums)
            if (std::isfinite(s)) integrals.push_back(-s * step);
    } else {
        std::vector<double> sums(static_cast<std::size_t>(replicates));
        engine::parallel_for_replicates(replicates, threads, [&](std::int64_t r) {
            auto res = engine::run_model_stream(
                model, x, step, 0, n_steps,
                [&](std::span<const double> y) { return f.eval(y) - mu; }, seed, r);
            sums[static_cast<std::size_t>(r)] =
                res.diverged ? std::numeric_limits<double>::quiet_NaN() : res.sum;
        });
        for (double s : sums) {
            if (std::isfinite(s))
                integrals.push_back(-s * step);
            else
                ++excluded;
        }
    }

    if (integrals.empty()) throw numerical_error("poisson potential: all paths diverged");

    PotentialEstimate est;
    est.replicates_used = static_cast<std::int64_t>(integrals.size());
    est.excluded = excluded;
    est.warning = excluded * 100 > replicates;
    est.estimate = mean_compensated(integrals);
    double ss = 0.0;
    for (double v : integrals) {
        double d = v - est.estimate;
        ss += d * d;
    }
    if (integrals.size() > 1) {
        double var = ss / (static_cast<double>(integrals.size()) - 1.0);
        est.std_error = std::sqrt(var / static_cast<double>(integrals.size()));
    }
    return est;
}

}  // namespace ergolab::functionals
