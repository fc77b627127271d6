#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ergolab/bounds.hpp"
#include "ergolab/conclab.hpp"
#include "ergolab/functionals.hpp"
#include "ergolab/sde.hpp"

namespace ergolab::ula {

// Smoothed-norm parameters: U(x) = strength (scale^2 + |x|^2)^{(1-q)/2}.
struct HeavyParams {
    double q = 0.5;
    double scale = 1.0;
    double strength = 1.0;
};

struct Potential {
    int dim = 1;
    std::string name;
    std::function<double(std::span<const double>)> U;
    std::function<void(std::span<const double>, std::span<double>)> grad;
    double q = 0.5;      // inward-gradient decay exponent, in (0,1)
    double L_lip = 1.0;  // Lipschitz constant of grad U
    double grad_sup = 1.0;  // sup |grad U| (may be +inf)
    double M0 = 0.0;
    double r_frak = 1.0;  // inward rate outside |x| >= M0
    std::optional<HeavyParams> heavy;

    // Ergodicity data of the associated Langevin diffusion (sigma = sqrt(2) I).
    sde::ErgodicityParams langevin_ergodicity() const;
};

// Heavy-tailed target with an everywhere-smooth gradient. The inward-drift
// certificate r = strength (1-q) / 2^{(1+q)/2} is valid for |x| >= scale;
// L_lip and grad_sup are the calculus maxima of the Hessian norm and |grad U|.
Potential make_heavy_potential(int d, double q, double scale, double strength);

// U(x) = |x|^2 / 2 (grad_sup is +inf; tuning formulas reject it, the chain and
// estimator work fine).
Potential make_gaussian_potential(int d);

Potential potential_by_name(const std::string& name, int d = 1, double q = 0.5,
                            double scale = 1.0, double strength = 1.0);

struct PotentialReport {
    bool inward_ok = false;
    double worst_margin = 0.0;  // min over probes of <grad U, x/|x|> - r |x|^{-q}
    double worst_fd_error = 0.0;
    bool fd_ok = false;
};

// Grid check of the inward-gradient condition plus a finite-difference check
// of grad U against U.
PotentialReport check_potential(const Potential& pot, std::span<const double> radii,
                                int directions_per_radius = 32, std::uint64_t seed = 0);

struct UlaChain {
    double delta_step = 0.0;
    int dim = 1;
    std::vector<double> states;  // (n_steps+1) x dim
    std::uint64_t seed = 0;
    std::int64_t replicate_id = 0;

    std::size_t n_states() const { return states.size() / static_cast<std::size_t>(dim); }
    std::span<const double> state(std::size_t k) const {
        return {states.data() + k * static_cast<std::size_t>(dim),
                static_cast<std::size_t>(dim)};
    }
};

// theta_{n+1} = theta_n - Delta grad U(theta_n) + sqrt(2 Delta) xi_{n+1}.
UlaChain ula_chain(const Potential& pot, double delta_step, std::int64_t n_steps,
                   std::span<const double> x0, std::uint64_t seed,
                   std::int64_t replicate_id = 0);

// (1/n) sum_{k=m+1..m+n} f(state_k).
double ula_estimator(const UlaChain& chain, std::int64_t m, std::int64_t n,
                     const functionals::TestFunction& f);

// Composite-Simpson normalized integral of f against exp(-U), d <= 2. Checks
// that the integrand has decayed at the boundary (heuristic mass check) and
// errors if the half-width looks too small.
double quadrature_target_integral(const Potential& pot, const functionals::TestFunction& f,
                                  double half_width, std::int64_t n_nodes);

double default_half_width(const Potential& pot);

struct UlaPacOverride {
    double delta_step = 0.0;
    std::int64_t n = 0;
    std::int64_t m = 0;
};

struct UlaPacResult {
    conclab::CoverageReport coverage;
    bounds::UlaTuning tuning;
    double target = 0.0;
    bool exploratory = false;  // an override replaced the tuned (Delta, n, m)
};

// Tunes (Delta, n, m) for the request, computes the target by quadrature and
// runs `runs` independent chains from 0. The tuned sizes are usually far past
// any simulation budget (the step-size caps scale like (delta eps)^2), so the
// run is rejected with a regime_error when it exceeds `step_budget` — unless
// an explicit override supplies the sizes to run instead, in which case the
// result is marked exploratory.
UlaPacResult ula_pac_experiment(const Potential& pot, const functionals::TestFunction& f,
                                const bounds::PACRequest& req,
                                const bounds::CalibrationConstants& consts,
                                std::int64_t runs, std::uint64_t seed,
                                std::optional<UlaPacOverride> override_sizes = {},
                                double step_budget = 2e9, int threads = 0);

// --- emission ---------------------------------------------------------------

std::string chain_csv(const UlaChain& chain, const nlohmann::json& config);

}  // namespace ergolab::ula
