#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <json.hpp>

#include "ergolab/bounds.hpp"
#include "ergolab/functionals.hpp"
#include "ergolab/sde.hpp"

namespace ergolab::conclab {

// Empirical tail of |G_t(f)| over replicate paths: exceedance fractions at the
// requested thresholds plus the sorted sample itself (the sample is what the
// calibrator needs; the thresholds are the reporting surface).
struct TailTable {
    std::vector<double> thresholds;
    std::vector<double> exceed_fraction;
    std::vector<double> standard_errors;
    std::int64_t replicates = 0;
    std::vector<double> values;  // sorted |G_t(f)|

    double exceed_at(double threshold) const;  // fraction of values > threshold
};

struct StationaryInit {
    enum class Kind { auto_pick, exact, burnin } kind = Kind::auto_pick;
    double t_burn = 0.0;
    static StationaryInit auto_pick() { return {}; }
    static StationaryInit exact() { return {Kind::exact, 0.0}; }
    static StationaryInit burnin(double t) { return {Kind::burnin, t}; }
};

TailTable run_tail_experiment(const sde::DiffusionModel& model,
                              const functionals::TestFunction& f, double t,
                              std::int64_t replicates, StationaryInit init,
                              std::uint64_t seed, std::vector<double> thresholds,
                              double step = sde::kDefaultStep, int threads = 0);

// Smallest W on the geometric grid [1e-3, 1e3] (factor 1.05) such that for all
// u in u_grid: P_hat(|G_t(f)| > e L W u^{sigma~}) <= e^{-u} + 2 SE.
double calibrate_W(const TailTable& table, double L, double sigma_tilde,
                   std::span<const double> u_grid);

// (p, (mean |v|^p)^{1/p}) for each requested order.
std::vector<std::pair<int, double>> empirical_moments(std::span<const double> values,
                                                      std::span<const int> p_list);

struct CoverageReport {
    std::int64_t runs = 0;
    std::int64_t within_eps = 0;
    double epsilon = 0.0;
    double delta = 0.0;
    double target_value = 0.0;
    bool pass = false;
    std::vector<double> estimates;
};

// Runs `runs` independent estimates (estimator(seed, run_id) must be a pure
// function of its arguments) and counts |estimate - target| <= eps. Verdict:
// within/runs >= 1 - delta - 2 * binomial SE.
CoverageReport pac_coverage(const std::function<double(std::uint64_t, std::int64_t)>& estimator,
                            double target, const bounds::PACRequest& req,
                            std::int64_t runs, std::uint64_t seed);

// --- emission ---------------------------------------------------------------

std::string tail_table_csv(const TailTable& table, const nlohmann::json& config);
nlohmann::json tail_table_json(const TailTable& table, const nlohmann::json& config);
std::string coverage_csv(const CoverageReport& rep, const nlohmann::json& config);
nlohmann::json coverage_json(const CoverageReport& rep, const nlohmann::json& config);

}  // namespace ergolab::conclab
