#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>

#include "ergolab/engine.hpp"
#include "ergolab/sde.hpp"

namespace ergolab::functionals {

// A polynomially bounded test function with its growth certificates:
// |f(x)| <= L (1 + |x|^eta1), and optionally gradient/Hessian growth degrees.
struct TestFunction {
    std::function<double(std::span<const double>)> eval;
    double eta1 = 0.0;
    double L = 1.0;
    std::optional<double> eta2;
    std::optional<double> eta3;
    std::optional<double> centered_mean;  // known mu(f), when available
    std::optional<engine::PolyF> poly;    // d = 1 fast path
    std::string name;

    double operator()(std::span<const double> x) const { return eval(x); }
};

// Registered functions: "one", "x", "x2", "x2c" (x^2 - 1), "x4", "abs".
// For d > 1, "x" reads the first coordinate and "x2" is |x|^2.
TestFunction function_by_name(const std::string& name);
std::vector<std::string> registered_functions();

TestFunction make_poly(double c0, double c1, double c2, std::string name = "poly");

// Checks |f| <= L(1+|x|^eta1) on a random probe cloud; throws on violation.
void check_growth(const TestFunction& f, int dim, double radius = 50.0,
                  int n_probes = 256, std::uint64_t seed = 0);

// (1/sqrt(t)) * sum_k f(X_{k delta}) * delta, left endpoints, t = n_steps*delta.
double continuous_additive(const sde::Trajectory& traj, const TestFunction& f);

// (1/sqrt(n Delta)) * sum_{k=1..n} f(X_{k Delta}) * Delta for n state rows.
double discrete_additive(std::span<const double> samples, int dim, double delta,
                         const TestFunction& f);

// (1/t) * integral of f over [v, v+t] on the trajectory grid.
double burnin_average_continuous(const sde::Trajectory& traj, double v, double t,
                                 const TestFunction& f);

// (1/n) * sum_{k=m+1..m+n} f(X_{k Delta}); samples holds rows X_Delta..X_{len Delta}.
double burnin_average_discrete(std::span<const double> samples, int dim, double delta,
                               std::int64_t m, std::int64_t n, const TestFunction& f);

struct PotentialEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
    std::int64_t replicates_used = 0;
    std::int64_t excluded = 0;
    bool warning = false;  // set when more than 1% of paths were excluded
};

// Monte Carlo estimate of the Poisson potential of -f at x: the mean over
// replicates of -int_0^horizon f(X_t) dt along paths started at x. f must be
// centered: centered_mean is consumed if present, otherwise a plug-in long-run
// average from an auxiliary path is subtracted. Truncation at `horizon` leaves
// an O(e^-horizon)-scale bias for exponentially ergodic models; it is not
// corrected.
PotentialEstimate estimate_poisson_potential(const sde::DiffusionModel& model,
                                             const TestFunction& f,
                                             std::span<const double> x, double horizon,
                                             std::int64_t replicates, std::uint64_t seed,
                                             double step = sde::kDefaultStep,
                                             int threads = 0);

// Plug-in long-run average of f (auxiliary path of `n_steps` Euler steps on a
// dedicated sub-seed), used when centered_mean is unknown.
double plugin_mean(const sde::DiffusionModel& model, const TestFunction& f,
                   std::uint64_t seed, std::int64_t n_steps = 100000,
                   double step = sde::kDefaultStep);

// Default truncation horizon for the potential integral: max(12, 6/iota'),
// i.e. at least six subexponential relaxation scales.
double default_poisson_horizon(const sde::DiffusionModel& model);

}  // namespace ergolab::functionals
