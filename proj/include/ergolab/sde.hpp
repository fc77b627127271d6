#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ergolab/rng.hpp"

namespace ergolab::sde {

// Parameters of the inward-drift condition and the induced Lyapunov data:
// outside the ball of radius M0 the radial drift is at most -r * |x|^{-q}.
struct ErgodicityParams {
    double q = 0.0;        // drift decay exponent, in [-1, 1)
    double q_prime = 0.0;  // drift growth exponent, >= 0
    double M0 = 0.0;
    double r = 1.0;  // radial drift strength (r > 0)
    double lambda_minus = 1.0;
    double lambda_plus = 1.0;
    double Lambda_cap = 1.0;
    double iota = 0.0;  // Lyapunov exponent scale; 0 means "use default rule"

    double q_plus() const { return q > 0.0 ? q : 0.0; }

    // Largest admissible iota is 2r/(lambda_plus*(1-q_plus)); the default sits
    // at half of it so r - iota*lambda_plus*(1-q_plus)/2 = r/2.
    double iota_or_default() const;

    // V_{q_+}(x) = exp(iota * |x|^{1-q_+})
    double lyapunov(std::span<const double> x) const;

    void validate() const;  // throws argument_error on a bad parameter set
};

// Subexponential rate scale iota' (and the alternative parameterization used
// by the exponential-regime display for q <= 0; both are exposed since the
// two displays are genuinely different).
double iota_prime(const ErgodicityParams& p);
double iota_prime_exponential(const ErgodicityParams& p);

// Fast-path metadata for scalar linear models dX = (a X + b) dt + sig dW.
struct Linear1d {
    double a = 0.0;
    double b = 0.0;
    double sigma = 1.0;
};

struct DiffusionModel {
    int dim = 1;
    std::string name;
    std::function<void(std::span<const double>, std::span<double>)> drift;
    // Row-major dim x dim matrix written to out.
    std::function<void(std::span<const double>, std::span<double>)> diffusion;
    ErgodicityParams erg;
    std::optional<Linear1d> linear1d;
    // Draws one exact stationary sample, when a closed form is registered.
    std::function<void(std::span<double>, rng::NormalStream&)> exact_sampler;

    bool has_exact_sampler() const { return static_cast<bool>(exact_sampler); }
};

struct Trajectory {
    double t0 = 0.0;
    double step = 0.0;
    int dim = 1;
    std::vector<double> states;  // (n_steps+1) x dim, row-major
    std::uint64_t seed = 0;
    std::int64_t replicate_id = 0;

    std::size_t n_states() const { return states.size() / static_cast<std::size_t>(dim); }
    std::size_t n_steps() const { return n_states() - 1; }
    double horizon() const { return step * static_cast<double>(n_steps()); }
    std::span<const double> state(std::size_t k) const {
        return {states.data() + k * static_cast<std::size_t>(dim),
                static_cast<std::size_t>(dim)};
    }
};

struct ConditionReport {
    bool holds = false;
    double worst_margin = 0.0;
    std::optional<std::vector<double>> witness;  // a violating probe, if any
};

// Grid check of the radial drift inequality over radii x random directions.
// margin(x) = <b(x), x/|x|> + r |x|^{-q}; holds iff max margin <= 0.
ConditionReport check_drift_condition(const DiffusionModel& model,
                                      std::span<const double> probe_radii,
                                      int directions_per_radius = 32,
                                      std::uint64_t probe_seed = 0);

inline constexpr double kDefaultStep = 1e-3;
inline constexpr double kDivergenceRadius = 1e12;

// Euler-Maruyama path. Bit-reproducible for equal inputs; throws
// numerical_error (with the step index in the message) if the path diverges.
Trajectory euler_maruyama(const DiffusionModel& model, std::span<const double> x0,
                          double step, std::int64_t n_steps, std::uint64_t seed,
                          std::int64_t replicate_id = 0);

struct StationaryMethod {
    enum class Kind { exact, burnin } kind = Kind::exact;
    double t_burn = 0.0;
    static StationaryMethod exact() { return {Kind::exact, 0.0}; }
    static StationaryMethod burnin(double t) { return {Kind::burnin, t}; }
};

std::vector<double> sample_stationary(const DiffusionModel& model, StationaryMethod method,
                                      std::uint64_t seed, std::int64_t replicate_id = 0,
                                      double step = kDefaultStep);

// Evaluates drift/diffusion on a probe grid and checks finiteness and uniform
// ellipticity (min eigenvalue of sigma sigma^T >= lambda_minus, up to slack).
void validate_model(const DiffusionModel& model, std::uint64_t probe_seed = 0);

// --- builders / registry ----------------------------------------------------

// dX = -theta X dt + sigma dW, with exact N(0, sigma^2/(2 theta) I) sampler.
DiffusionModel make_ou(int dim, double theta = 1.0, double sigma = std::sqrt(2.0));

// dX = A X dt + sigma dW (A row-major d x d); ergodicity data for q = -1 must
// be supplied by the caller via `r_radial` (a lower bound on the inward rate).
DiffusionModel make_linear(int dim, std::vector<double> A, double sigma, double r_radial,
                           double M0 = 0.0);

// d = 1, b(x) = -x/(1+|x|): satisfies the q = 0 condition with r = 0.5, M0 = 1.
DiffusionModel make_contracting1d(double sigma = 1.0);

// Registry addressed by name from the CLI: "ou1d", "ou2d", "ou3d", "contract1d".
DiffusionModel model_by_name(const std::string& name);
std::vector<std::string> registered_models();

}  // namespace ergolab::sde
