#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "ergolab/sde.hpp"

namespace ergolab::engine {

// f(x) = c0 + c1 x + c2 x^2 for scalar states; the fast batch paths and the
// generic paths evaluate this with the same op order, so the two routes stay
// bit-identical.
struct PolyF {
    double c0 = 0.0, c1 = 0.0, c2 = 0.0;
    double operator()(double x) const { return (c0 + c1 * x) + c2 * (x * x); }
};

// Result of running a group of independent scalar replicates. For replicate r:
// sums[r] = sum of f over states with index in [n_skip, n_skip+n_accum)
// (state index k = value after k steps; the left-endpoint grid), and
// finals[r] = the state after n_skip+n_accum steps. A replicate that tripped
// the divergence guard has NaN in both slots.
struct BatchResult {
    std::vector<double> sums;
    std::vector<double> finals;
    std::int64_t diverged = 0;
};

// Euler-Maruyama for dX = (a X + b) dt + sig dW, replicated. Per-replicate
// streams are (seed, rep0+r, Domain::noise), identical to euler_maruyama.
BatchResult run_linear1d(const sde::Linear1d& par, std::span<const double> x0,
                         double step, std::int64_t n_skip, std::int64_t n_accum,
                         const PolyF& f, std::uint64_t seed, std::int64_t rep0,
                         std::int64_t count, int threads = 0);

// ULA chain theta' = theta - h U'(theta) + sqrt(2h) xi for the q = 1/2
// heavy-tailed gradient U'(x) = c x (s2 + x^2)^{-3/4}, replicated.
BatchResult run_ula_qhalf(double c, double s2, double step, std::int64_t n_skip,
                          std::int64_t n_accum, const PolyF& f, std::uint64_t seed,
                          std::int64_t rep0, std::int64_t count,
                          std::span<const double> x0, int threads = 0);

// Generic scalar fallback: one replicate of an arbitrary model, streaming the
// functional without materializing the trajectory. Matches run_linear1d bit
// for bit on linear models.
struct StreamResult {
    double sum = 0.0;
    std::vector<double> final_state;
    bool diverged = false;
};

StreamResult run_model_stream(const sde::DiffusionModel& model, std::span<const double> x0,
                              double step, std::int64_t n_skip, std::int64_t n_accum,
                              const std::function<double(std::span<const double>)>& f,
                              std::uint64_t seed, std::int64_t replicate_id);

// Static-chunk replicate parallelism; fn(r) must only write state owned by r.
void parallel_for_replicates(std::int64_t count, int threads,
                             const std::function<void(std::int64_t)>& fn);

}  // namespace ergolab::engine
