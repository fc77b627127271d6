#include "ergolab/conclab.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ergolab/errors.hpp"
#include "ergolab/io.hpp"
#include "ergolab/numeric.hpp"

namespace ergolab::conclab {

namespace {

constexpr double kE = 2.718281828459045235360287471352662498;

double binom_se(double p, std::int64_t n) {
    return std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(n));
}

}  // namespace

double TailTable::exceed_at(double threshold) const {
    // values are sorted ascending; count strictly greater.
    auto it = std::upper_bound(values.begin(), values.end(), threshold);
    return static_cast<double>(values.end() - it) / static_cast<double>(values.size());
}

TailTable run_tail_experiment(const sde::DiffusionModel& model,
                              const functionals::TestFunction& f, double t,
                              std::int64_t replicates, StationaryInit init,
                              std::uint64_t seed, std::vector<double> thresholds,
                              double step, int threads) {
    if (replicates < 100) throw argument_error("tail experiment: replicates >= 100");
    if (!(t > 0.0)) throw argument_error("tail experiment: t must be > 0");
    if (!std::is_sorted(thresholds.begin(), thresholds.end()))
        throw argument_error("tail experiment: thresholds must be sorted");
    for (double thr : thresholds)
        if (!(thr >= 0.0)) throw argument_error("tail experiment: thresholds must be >= 0");

    sde::StationaryMethod method = sde::StationaryMethod::exact();
    if (init.kind == StationaryInit::Kind::burnin) {
        method = sde::StationaryMethod::burnin(init.t_burn);
    } else if (init.kind == StationaryInit::Kind::auto_pick) {
        method = model.has_exact_sampler()
                     ? sde::StationaryMethod::exact()
                     : sde::StationaryMethod::burnin(20.0 * (1.0 + model.erg.M0));
    }

    const double mu =
        f.centered_mean ? *f.centered_mean : functionals::plugin_mean(model, f, seed);
    const auto n_steps = static_cast<std::int64_t>(std::llround(t / step));
    const double scale = step / std::sqrt(static_cast<double>(n_steps) * step);

    std::vector<double> vals;
    std::int64_t diverged = 0;

    if (model.dim == 1 && model.linear1d && f.poly) {
        engine::PolyF p = *f.poly;
        p.c0 -= mu;
        std::vector<double> x0(static_cast<std::size_t>(replicates));
        for (std::int64_t r = 0; r < replicates; ++r)
            x0[static_cast<std::size_t>(r)] =
                sde::sample_stationary(model, method, seed, r, step)[0];
        auto res = engine::run_linear1d(*model.linear1d, x0, step, 0, n_steps, p, seed, 0,
                                        replicates, threads);
        diverged = res.diverged;
        vals.reserve(static_cast<std::size_t>(replicates));
        for (double s : res.sums)
            if (std::isfinite(s)) vals.push_back(std::fabs(s * scale));
    } else {
        std::vector<double> sums(static_cast<std::size_t>(replicates));
        engine::parallel_for_replicates(replicates, threads, [&](std::int64_t r) {
            auto x0 = sde::sample_stationary(model, method, seed, r, step);
            auto res = engine::run_model_stream(
                model, x0, step, 0, n_steps,
                [&](std::span<const double> y) { return f.eval(y) - mu; }, seed, r);
            sums[static_cast<std::size_t>(r)] =
                res.diverged ? std::numeric_limits<double>::quiet_NaN() : res.sum;
        });
        for (double s : sums) {
            if (std::isfinite(s))
                vals.push_back(std::fabs(s * scale));
            else
                ++diverged;
        }
    }

    if (diverged * 100 > replicates)
        throw numerical_error("tail experiment: more than 1% of paths diverged (" +
                              std::to_string(diverged) + "/" + std::to_string(replicates) +
                              ")");

    std::sort(vals.begin(), vals.end());
    TailTable table;
    table.values = std::move(vals);
    table.replicates = static_cast<std::int64_t>(table.values.size());
    table.thresholds = std::move(thresholds);
    for (double thr : table.thresholds) {
        double p = table.exceed_at(thr);
        table.exceed_fraction.push_back(p);
        table.standard_errors.push_back(binom_se(p, table.replicates));
    }
    return table;
}

double calibrate_W(const TailTable& table, double L, double sigma_tilde,
                   std::span<const double> u_grid) {
    if (table.values.empty()) throw argument_error("calibrate_W: empty table");
    if (!(L > 0.0)) throw argument_error("calibrate_W: L must be > 0");
    if (u_grid.empty()) throw argument_error("calibrate_W: empty u grid");
    for (double u : u_grid)
        if (!(u >= 2.0)) throw argument_error("calibrate_W: u grid must lie in [2, inf)");

    auto satisfies = [&](double w) {
        for (double u : u_grid) {
            double thr = kE * L * w * std::pow(u, sigma_tilde);
            double p = table.exceed_at(thr);
            double se = binom_se(p, table.replicates);
            if (!(p <= std::exp(-u) + 2.0 * se)) return false;
        }
        return true;
    };

    for (double w = 1e-3; w <= 1e3 * 1.0000001; w *= 1.05)
        if (satisfies(w)) return w;

    std::ostringstream diag;
    diag << "calibrate_W: no grid value satisfies the tail constraints; at w=1e3:";
    for (double u : u_grid) {
        double thr = kE * L * 1e3 * std::pow(u, sigma_tilde);
        diag << " [u=" << u << " p=" << table.exceed_at(thr) << " cap=" << std::exp(-u)
             << "]";
    }
    throw calibration_error(diag.str());
}

std::vector<std::pair<int, double>> empirical_moments(std::span<const double> values,
                                                      std::span<const int> p_list) {
    if (values.empty()) throw argument_error("empirical_moments: empty sample");
    std::vector<std::pair<int, double>> out;
    for (int p : p_list) {
        if (p < 1) throw argument_error("empirical_moments: p must be >= 1");
        double s = 0.0;
        for (double v : values) s += std::pow(std::fabs(v), static_cast<double>(p));
        s /= static_cast<double>(values.size());
        out.emplace_back(p, std::pow(s, 1.0 / static_cast<double>(p)));
    }
    return out;
}

CoverageReport pac_coverage(const std::function<double(std::uint64_t, std::int64_t)>& estimator,
                            double target, const bounds::PACRequest& req,
                            std::int64_t runs, std::uint64_t seed) {
    req.validate();
    if (runs < 20) throw argument_error("pac_coverage: runs >= 20");
    CoverageReport rep;
    rep.runs = runs;
    rep.epsilon = req.epsilon;
    rep.delta = req.delta;
    rep.target_value = target;
    rep.estimates.resize(static_cast<std::size_t>(runs));
    for (std::int64_t r = 0; r < runs; ++r)
        rep.estimates[static_cast<std::size_t>(r)] = estimator(seed, r);
    for (double est : rep.estimates)
        if (std::fabs(est - target) <= req.epsilon) ++rep.within_eps;
    double p = static_cast<double>(rep.within_eps) / static_cast<double>(runs);
    rep.pass = p >= 1.0 - req.delta - 2.0 * binom_se(p, runs);
    return rep;
}

std::string tail_table_csv(const TailTable& table, const nlohmann::json& config) {
    std::string out = io::csv_preamble(config);
    out += "threshold,exceed_fraction,se\n";
    for (std::size_t i = 0; i < table.thresholds.size(); ++i) {
        out += io::g17(table.thresholds[i]);
        out += ",";
        out += io::g17(table.exceed_fraction[i]);
        out += ",";
        out += io::g17(table.standard_errors[i]);
        out += "\n";
    }
    return out;
}

nlohmann::json tail_table_json(const TailTable& table, const nlohmann::json& config) {
    nlohmann::json data{{"replicates", table.replicates},
                        {"thresholds", table.thresholds},
                        {"exceed_fraction", table.exceed_fraction},
                        {"standard_errors", table.standard_errors}};
    return io::envelope(config, std::move(data));
}

std::string coverage_csv(const CoverageReport& rep, const nlohmann::json& config) {
    std::string out = io::csv_preamble(config);
    out += "run_id,estimate,within\n";
    for (std::size_t i = 0; i < rep.estimates.size(); ++i) {
        bool within = std::fabs(rep.estimates[i] - rep.target_value) <= rep.epsilon;
        out += std::to_string(i);
        out += ",";
        out += io::g17(rep.estimates[i]);
        out += ",";
        out += within ? "1" : "0";
        out += "\n";
    }
    return out;
}

nlohmann::json coverage_json(const CoverageReport& rep, const nlohmann::json& config) {
    nlohmann::json data{{"runs", rep.runs},          {"within_eps", rep.within_eps},
                        {"epsilon", rep.epsilon},    {"delta", rep.delta},
                        {"target", rep.target_value}, {"pass", rep.pass},
                        {"estimates", rep.estimates}};
    return io::envelope(config, std::move(data));
}

}  // namespace ergolab::conclab
