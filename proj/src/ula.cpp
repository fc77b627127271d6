#include "ergolab/ula.hpp"

#include <algorithm>
#include <cmath>

#include "ergolab/engine.hpp"
#include "ergolab/errors.hpp"
#include "ergolab/io.hpp"
#include "ergolab/numeric.hpp"

namespace ergolab::ula {

sde::ErgodicityParams Potential::langevin_ergodicity() const {
    sde::ErgodicityParams p;
    p.q = q;
    p.q_prime = 0.0;  // bounded gradient
    p.M0 = M0;
    p.r = r_frak;
    p.lambda_minus = 2.0;
    p.lambda_plus = 2.0;
    p.Lambda_cap = 2.0;
    return p;
}

Potential make_heavy_potential(int d, double q, double scale, double strength) {
    if (d < 1) throw argument_error("heavy potential: d >= 1");
    if (!(q > 0.0 && q < 1.0)) throw argument_error("heavy potential: q in (0,1)");
    if (!(scale > 0.0) || !(strength > 0.0))
        throw argument_error("heavy potential: scale, strength > 0");
    Potential pot;
    pot.dim = d;
    pot.name = "heavy";
    pot.q = q;
    pot.heavy = HeavyParams{q, scale, strength};
    const double s2 = scale * scale;
    const double c = strength * (1.0 - q);
    pot.U = [strength, q, s2](std::span<const double> x) {
        double n2 = 0.0;
        for (double v : x) n2 += v * v;
        return strength * std::pow(s2 + n2, (1.0 - q) / 2.0);
    };
    if (q == 0.5) {
        // sqrt-form shared with the batch kernel so both routes agree bitwise
        pot.grad = [c, s2](std::span<const double> x, std::span<double> out) {
            double n2 = 0.0;
            for (double v : x) n2 += v * v;
            double w = s2 + n2;
            double sw = std::sqrt(w);
            double qw = std::sqrt(sw);
            double denom = sw * qw;
            for (std::size_t i = 0; i < x.size(); ++i) out[i] = c * (x[i] / denom);
        };
    } else {
        pot.grad = [c, q, s2](std::span<const double> x, std::span<double> out) {
            double n2 = 0.0;
            for (double v : x) n2 += v * v;
            double w = std::pow(s2 + n2, -(1.0 + q) / 2.0);
            for (std::size_t i = 0; i < x.size(); ++i) out[i] = c * x[i] * w;
        };
    }
    // Calculus maxima: the Hessian norm peaks at the origin, |grad U| at
    // |x| = scale/sqrt(q).
    pot.L_lip = strength * (1.0 - q) * std::pow(scale, -(1.0 + q));
    pot.grad_sup = strength * (1.0 - q) * std::pow(scale, -q) * std::pow(q, q / 2.0) *
                   std::pow(1.0 + q, -(1.0 + q) / 2.0);
    pot.M0 = scale;
    pot.r_frak = strength * (1.0 - q) / std::pow(2.0, (1.0 + q) / 2.0);
    return pot;
}

Potential make_gaussian_potential(int d) {
    if (d < 1) throw argument_error("gaussian potential: d >= 1");
    Potential pot;
    pot.dim = d;
    pot.name = "gauss";
    pot.q = 0.5;  // <grad U, x/|x|> = |x| >= |x|^{-q} for |x| >= 1, any q in (0,1)
    pot.U = [](std::span<const double> x) {
        double n2 = 0.0;
        for (double v : x) n2 += v * v;
        return n2 / 2.0;
    };
    pot.grad = [](std::span<const double> x, std::span<double> out) {
        for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i];
    };
    pot.L_lip = 1.0;
    pot.grad_sup = std::numeric_limits<double>::infinity();
    pot.M0 = 1.0;
    pot.r_frak = 1.0;
    return pot;
}

Potential potential_by_name(const std::string& name, int d, double q, double scale,
                            double strength) {
    if (name == "heavy") return make_heavy_potential(d, q, scale, strength);
    if (name == "gauss") return make_gaussian_potential(d);
    throw argument_error("unknown potential '" + name + "'");
}

PotentialReport check_potential(const Potential& pot, std::span<const double> radii,
                                int directions_per_radius, std::uint64_t seed) {
    if (directions_per_radius < 1) throw argument_error("check_potential: directions >= 1");
    rng::NormalStream stream(seed, 4, rng::Domain::probe);
    PotentialReport rep;
    rep.worst_margin = std::numeric_limits<double>::infinity();
    rep.worst_fd_error = 0.0;
    std::vector<double> x(static_cast<std::size_t>(pot.dim));
    std::vector<double> g(static_cast<std::size_t>(pot.dim));
    std::vector<double> xp(static_cast<std::size_t>(pot.dim));
    std::vector<double> xm(static_cast<std::size_t>(pot.dim));
    for (double rad : radii) {
        int ndir = pot.dim == 1 ? 2 : directions_per_radius;
        for (int j = 0; j < ndir; ++j) {
            if (pot.dim == 1) {
                x[0] = j == 0 ? rad : -rad;
            } else {
                double n = 0.0;
                for (auto& v : x) {
                    v = stream.next();
                    n += v * v;
                }
                n = std::sqrt(n);
                for (auto& v : x) v *= rad / n;
            }
            pot.grad(x, g);
            if (!all_finite(g)) throw numerical_error("check_potential: non-finite gradient");
            if (rad >= pot.M0 && rad > 0.0) {
                double margin = dot(g, x) / rad - pot.r_frak * std::pow(rad, -pot.q);
                rep.worst_margin = std::min(rep.worst_margin, margin);
            }
            // Central finite differences vs the analytic gradient.
            double gn = norm2(g);
            double fd_err2 = 0.0;
            for (int a = 0; a < pot.dim; ++a) {
                double h = 1e-6 * (1.0 + std::fabs(x[static_cast<std::size_t>(a)]));
                xp = x;
                xm = x;
                xp[static_cast<std::size_t>(a)] += h;
                xm[static_cast<std::size_t>(a)] -= h;
                double fd = (pot.U(xp) - pot.U(xm)) / (2.0 * h);
                double diff = fd - g[static_cast<std::size_t>(a)];
                fd_err2 += diff * diff;
            }
            double fd_err = std::sqrt(fd_err2) / (1.0 + gn);
            rep.worst_fd_error = std::max(rep.worst_fd_error, fd_err);
        }
    }
    // The certificate is exactly tight at |x| = M0 for the smoothed-norm
    // family; allow rounding-scale slack there.
    rep.inward_ok = rep.worst_margin >= -1e-10 * (1.0 + pot.r_frak);
    rep.fd_ok = rep.worst_fd_error <= 1e-5;
    return rep;
}

UlaChain ula_chain(const Potential& pot, double delta_step, std::int64_t n_steps,
                   std::span<const double> x0, std::uint64_t seed,
                   std::int64_t replicate_id) {
    if (!(delta_step > 0.0)) throw argument_error("ula_chain: delta_step > 0");
    if (n_steps < 1) throw argument_error("ula_chain: n_steps >= 1");
    if (static_cast<int>(x0.size()) != pot.dim)
        throw argument_error("ula_chain: x0 dimension mismatch");

    UlaChain chain;
    chain.delta_step = delta_step;
    chain.dim = pot.dim;
    chain.seed = seed;
    chain.replicate_id = replicate_id;
    chain.states.reserve(static_cast<std::size_t>(n_steps + 1) * pot.dim);

    rng::NormalStream stream(seed, static_cast<std::uint64_t>(replicate_id),
                             rng::Domain::noise);
    std::vector<double> x(x0.begin(), x0.end());
    std::vector<double> g(static_cast<std::size_t>(pot.dim));
    const double sqrt_2h = std::sqrt(2.0 * delta_step);

    chain.states.insert(chain.states.end(), x.begin(), x.end());
    for (std::int64_t k = 0; k < n_steps; ++k) {
        pot.grad(x, g);
        for (int a = 0; a < pot.dim; ++a) {
            double zz = sqrt_2h * stream.next();
            x[static_cast<std::size_t>(a)] =
                (x[static_cast<std::size_t>(a)] - delta_step * g[static_cast<std::size_t>(a)]) +
                zz;
        }
        double n2 = 0.0;
        bool ok = true;
        for (double v : x) {
            if (!std::isfinite(v)) ok = false;
            n2 += v * v;
        }
        if (!ok || n2 > sde::kDivergenceRadius * sde::kDivergenceRadius)
            throw numerical_error("ULA chain diverged at step " + std::to_string(k + 1));
        chain.states.insert(chain.states.end(), x.begin(), x.end());
    }
    return chain;
}

double ula_estimator(const UlaChain& chain, std::int64_t m, std::int64_t n,
                     const functionals::TestFunction& f) {
    if (m < 0 || n < 1) throw argument_error("ula_estimator: m >= 0, n >= 1");
    if (chain.n_states() < static_cast<std::size_t>(m + n + 1))
        throw argument_error("ula_estimator: chain too short for m+n");
    double s = 0.0;
    for (std::int64_t k = m + 1; k <= m + n; ++k) {
        double v = f.eval(chain.state(static_cast<std::size_t>(k)));
        if (!std::isfinite(v)) throw numerical_error("ula_estimator: non-finite value");
        s += v;
    }
    return s / static_cast<double>(n);
}

double default_half_width(const Potential& pot) {
    if (pot.heavy)
        return 50.0 * std::pow(pot.heavy->scale, 1.0 / (1.0 - pot.heavy->q));
    return 15.0;
}

namespace {

// One-dimensional composite Simpson over [-hw, hw] of w(x) and f(x) w(x) with
// w = exp(-(U - U0)); returns the normalized ratio.
double simpson_ratio_1d(const Potential& pot, const functionals::TestFunction& f,
                        double hw, std::int64_t nodes) {
    const double h = 2.0 * hw / static_cast<double>(nodes - 1);
    double u0 = std::numeric_limits<double>::infinity();
    std::vector<double> xv(1);
    for (std::int64_t i = 0; i < nodes; ++i) {
        xv[0] = -hw + h * static_cast<double>(i);
        u0 = std::min(u0, pot.U(xv));
    }
    double z = 0.0, zf = 0.0, interior_max = 0.0, boundary_max = 0.0;
    for (std::int64_t i = 0; i < nodes; ++i) {
        xv[0] = -hw + h * static_cast<double>(i);
        double w = (i == 0 || i == nodes - 1) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        double dens = std::exp(-(pot.U(xv) - u0));
        double fx = f.eval(xv);
        if (!std::isfinite(dens) || !std::isfinite(fx))
            throw numerical_error("quadrature: non-finite integrand");
        z += w * dens;
        zf += w * fx * dens;
        double mass = dens * (1.0 + std::fabs(fx));
        if (i == 0 || i == nodes - 1)
            boundary_max = std::max(boundary_max, mass);
        else
            interior_max = std::max(interior_max, mass);
    }
    if (!(boundary_max <= 1e-12 * interior_max))
        throw argument_error(
            "quadrature: integrand has not decayed at the boundary; increase half_width");
    return zf / z;
}

double simpson_ratio_2d(const Potential& pot, const functionals::TestFunction& f,
                        double hw, std::int64_t nodes) {
    const double h = 2.0 * hw / static_cast<double>(nodes - 1);
    std::vector<double> xv(2);
    double u0 = std::numeric_limits<double>::infinity();
    for (std::int64_t i = 0; i < nodes; ++i) {
        xv[0] = -hw + h * static_cast<double>(i);
        xv[1] = 0.0;
        u0 = std::min(u0, pot.U(xv));
    }
    double z = 0.0, zf = 0.0, interior_max = 0.0, boundary_max = 0.0;
    for (std::int64_t i = 0; i < nodes; ++i) {
        double wi = (i == 0 || i == nodes - 1) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        xv[0] = -hw + h * static_cast<double>(i);
        for (std::int64_t j = 0; j < nodes; ++j) {
            double wj = (j == 0 || j == nodes - 1) ? 1.0 : (j % 2 ? 4.0 : 2.0);
            xv[1] = -hw + h * static_cast<double>(j);
            double dens = std::exp(-(pot.U(xv) - u0));
            double fx = f.eval(xv);
            if (!std::isfinite(dens) || !std::isfinite(fx))
                throw numerical_error("quadrature: non-finite integrand");
            double w = wi * wj;
            z += w * dens;
            zf += w * fx * dens;
            double mass = dens * (1.0 + std::fabs(fx));
            bool on_boundary = i == 0 || i == nodes - 1 || j == 0 || j == nodes - 1;
            if (on_boundary)
                boundary_max = std::max(boundary_max, mass);
            else
                interior_max = std::max(interior_max, mass);
        }
    }
    if (!(boundary_max <= 1e-12 * interior_max))
        throw argument_error(
            "quadrature: integrand has not decayed at the boundary; increase half_width");
    return zf / z;
}

}  // namespace

double quadrature_target_integral(const Potential& pot, const functionals::TestFunction& f,
                                  double half_width, std::int64_t n_nodes) {
    if (pot.dim > 2) throw argument_error("quadrature: only d <= 2 supported");
    if (!(half_width > 0.0)) throw argument_error("quadrature: half_width > 0");
    if (n_nodes < 9) throw argument_error("quadrature: n_nodes >= 9");
    std::int64_t nodes = n_nodes | 1;  // Simpson wants an odd node count
    if (pot.dim == 1) return simpson_ratio_1d(pot, f, half_width, nodes);
    return simpson_ratio_2d(pot, f, half_width, nodes);
}

UlaPacResult ula_pac_experiment(const Potential& pot, const functionals::TestFunction& f,
                                const bounds::PACRequest& req,
                                const bounds::CalibrationConstants& consts,
                                std::int64_t runs, std::uint64_t seed,
                                std::optional<UlaPacOverride> override_sizes,
                                double step_budget, int threads) {
    if (pot.dim > 2) throw argument_error("ula pac: d <= 2 (quadrature oracle)");
    if (runs < 20) throw argument_error("ula pac: runs >= 20");
    if (!f.eta2 || !f.eta3)
        throw argument_error("ula pac: f needs gradient/Hessian growth degrees");

    UlaPacResult out;
    out.tuning = bounds::ula_tuning(req, pot.q, f.eta1, *f.eta2, *f.eta3, pot.dim,
                                    pot.L_lip, pot.grad_sup, consts);

    double delta_step = out.tuning.delta_step;
    double n_real = out.tuning.n;
    double m_real = out.tuning.m;
    if (override_sizes) {
        delta_step = override_sizes->delta_step;
        n_real = static_cast<double>(override_sizes->n);
        m_real = static_cast<double>(override_sizes->m);
        out.exploratory = true;
    }
    double total_steps = (n_real + m_real + 1.0) * static_cast<double>(runs);
    if (!(total_steps <= step_budget))
        throw regime_error(
            "ula pac: tuned sizes exceed the simulation budget (n=" +
            std::to_string(n_real) + ", m=" + std::to_string(m_real) + ", runs=" +
            std::to_string(runs) + " -> " + std::to_string(total_steps) +
            " steps > budget " + std::to_string(step_budget) + ")");

    // Half-width enlarged past the plain default so the oracle still covers
    // weakly confining potentials (mass ~ exp(-strength r^{1-q})).
    double hw = default_half_width(pot);
    if (pot.heavy)
        hw = std::max(hw, std::pow((45.0 + 10.0 * std::max(1.0, f.eta1)) /
                                       pot.heavy->strength,
                                   1.0 / (1.0 - pot.heavy->q)));
    std::int64_t nodes = pot.dim == 1 ? 200001 : 1601;
    out.target = quadrature_target_integral(pot, f, hw, nodes);

    const auto n = static_cast<std::int64_t>(n_real);
    const auto m = static_cast<std::int64_t>(m_real);

    std::vector<double> estimates(static_cast<std::size_t>(runs));
    const bool fast = pot.dim == 1 && pot.heavy && pot.heavy->q == 0.5 && f.poly;
    if (fast) {
        const double c = pot.heavy->strength * (1.0 - pot.heavy->q);
        const double s2 = pot.heavy->scale * pot.heavy->scale;
        std::vector<double> x0(static_cast<std::size_t>(runs), 0.0);
        auto res = engine::run_ula_qhalf(c, s2, delta_step, m + 1, n, *f.poly, seed, 0,
                                        runs, x0, threads);
        if (res.diverged > 0) throw numerical_error("ula pac: a chain diverged");
        for (std::int64_t r = 0; r < runs; ++r)
            estimates[static_cast<std::size_t>(r)] =
                res.sums[static_cast<std::size_t>(r)] / static_cast<double>(n);
    } else {
        std::vector<double> x0(static_cast<std::size_t>(pot.dim), 0.0);
        engine::parallel_for_replicates(runs, threads, [&](std::int64_t r) {
            auto chain = ula_chain(pot, delta_step, m + n, x0, seed, r);
            estimates[static_cast<std::size_t>(r)] = ula_estimator(chain, m, n, f);
        });
    }

    conclab::CoverageReport rep;
    rep.runs = runs;
    rep.epsilon = req.epsilon;
    rep.delta = req.delta;
    rep.target_value = out.target;
    rep.estimates = std::move(estimates);
    for (double est : rep.estimates)
        if (std::fabs(est - out.target) <= req.epsilon) ++rep.within_eps;
    double p = static_cast<double>(rep.within_eps) / static_cast<double>(runs);
    double se = std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(runs));
    rep.pass = p >= 1.0 - req.delta - 2.0 * se;
    out.coverage = std::move(rep);
    return out;
}

std::string chain_csv(const UlaChain& chain, const nlohmann::json& config) {
    std::string out = io::csv_preamble(config);
    out += "step";
    for (int a = 0; a < chain.dim; ++a) out += ",x" + std::to_string(a);
    out += "\n";
    for (std::size_t k = 0; k < chain.n_states(); ++k) {
        out += std::to_string(k);
        auto x = chain.state(k);
        for (double v : x) {
            out += ",";
            out += io::g17(v);
        }
        out += "\n";
    }
    return out;
}

}  // namespace ergolab::ula
