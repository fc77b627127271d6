#include "ergolab/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <mutex>
#include <thread>

#include "ergolab/errors.hpp"
#include "ergolab/kernels.hpp"
#include "ergolab/numeric.hpp"

namespace ergolab::engine {

namespace {

constexpr std::size_t kLanes = 64;   // replicates per in-flight group
constexpr std::size_t kStrip = 256;  // steps per normals strip

bool lane_ok(double x) { return std::isfinite(x) && std::fabs(x) <= sde::kDivergenceRadius; }

// Shared strip-driver for scalar-state batch simulations. Stepper is called
// once per step on the live lane block.
template <typename Stepper>
BatchResult run_scalar_batch(std::span<const double> x0, std::int64_t n_skip,
                             std::int64_t n_accum, const PolyF& f, std::uint64_t seed,
                             std::int64_t rep0, std::int64_t count, int threads,
                             const Stepper& stepper) {
    BatchResult out;
    out.sums.assign(static_cast<std::size_t>(count), 0.0);
    out.finals.assign(static_cast<std::size_t>(count), 0.0);
    const std::int64_t n_total = n_skip + n_accum;
    std::vector<std::int64_t> diverged_per_group(
        static_cast<std::size_t>((count + kLanes - 1) / kLanes), 0);

    auto run_group = [&](std::int64_t g) {
        const std::int64_t lane0 = g * static_cast<std::int64_t>(kLanes);
        const std::size_t lanes =
            static_cast<std::size_t>(std::min<std::int64_t>(kLanes, count - lane0));
        double x[kLanes], acc[kLanes], znow[kLanes];
        bool dead[kLanes] = {};
        std::vector<double> strip(lanes * kStrip);
        std::vector<double> stripT(lanes * kStrip);
        rng::PhiloxKey keys[kLanes];
        for (std::size_t l = 0; l < lanes; ++l) {
            x[l] = x0[static_cast<std::size_t>(lane0) + l];
            acc[l] = 0.0;
            keys[l] = rng::derive_key(seed, static_cast<std::uint64_t>(rep0 + lane0 + l),
                                      rng::Domain::noise);
        }
        std::int64_t k = 0;
        while (k < n_total) {
            const std::size_t chunk =
                static_cast<std::size_t>(std::min<std::int64_t>(kStrip, n_total - k));
            for (std::size_t l = 0; l < lanes; ++l)
                rng::fill_normals(keys[l], static_cast<std::uint64_t>(k), chunk,
                                  strip.data() + l * kStrip);
            for (std::size_t s = 0; s < chunk; ++s)
                for (std::size_t l = 0; l < lanes; ++l)
                    stripT[s * lanes + l] = strip[l * kStrip + s];
            for (std::size_t s = 0; s < chunk; ++s) {
                const std::int64_t kk = k + static_cast<std::int64_t>(s);
                if (kk >= n_skip)
                    simd::kernels().accum_poly(acc, x, lanes, f.c0, f.c1, f.c2);
                std::memcpy(znow, stripT.data() + s * lanes, lanes * sizeof(double));
                stepper(x, znow, lanes);
            }
            k += static_cast<std::int64_t>(chunk);
            for (std::size_t l = 0; l < lanes; ++l) {
                if (!dead[l] && !lane_ok(x[l])) {
                    dead[l] = true;
                    ++diverged_per_group[static_cast<std::size_t>(g)];
                    x[l] = std::numeric_limits<double>::quiet_NaN();
                    acc[l] = std::numeric_limits<double>::quiet_NaN();
                }
            }
        }
        for (std::size_t l = 0; l < lanes; ++l) {
            out.sums[static_cast<std::size_t>(lane0) + l] = dead[l]
                ? std::numeric_limits<double>::quiet_NaN()
                : acc[l];
            out.finals[static_cast<std::size_t>(lane0) + l] = x[l];
        }
    };

    const std::int64_t groups = (count + static_cast<std::int64_t>(kLanes) - 1) /
                                static_cast<std::int64_t>(kLanes);
    parallel_for_replicates(groups, threads, run_group);
    for (auto d : diverged_per_group) out.diverged += d;
    return out;
}

}  // namespace

BatchResult run_linear1d(const sde::Linear1d& par, std::span<const double> x0, double step,
                         std::int64_t n_skip, std::int64_t n_accum, const PolyF& f,
                         std::uint64_t seed, std::int64_t rep0, std::int64_t count,
                         int threads) {
    if (!(step > 0.0)) throw argument_error("run_linear1d: step must be > 0");
    if (static_cast<std::int64_t>(x0.size()) != count)
        throw argument_error("run_linear1d: x0 size mismatch");
    const double sqrt_h = std::sqrt(step);
    return run_scalar_batch(
        x0, n_skip, n_accum, f, seed, rep0, count, threads,
        [&](double* xs, const double* zs, std::size_t lanes) {
            simd::kernels().euler_linear_step(xs, zs, lanes, par.a, par.b, step, sqrt_h,
                                              par.sigma);
        });
}

BatchResult run_ula_qhalf(double c, double s2, double step, std::int64_t n_skip,
                          std::int64_t n_accum, const PolyF& f, std::uint64_t seed,
                          std::int64_t rep0, std::int64_t count,
                          std::span<const double> x0, int threads) {
    if (!(step > 0.0)) throw argument_error("run_ula_qhalf: step must be > 0");
    if (static_cast<std::int64_t>(x0.size()) != count)
        throw argument_error("run_ula_qhalf: x0 size mismatch");
    const double sqrt_2h = std::sqrt(2.0 * step);
    return run_scalar_batch(
        x0, n_skip, n_accum, f, seed, rep0, count, threads,
        [&](double* xs, const double* zs, std::size_t lanes) {
            simd::kernels().ula_qhalf_step(xs, zs, lanes, c, s2, step, sqrt_2h);
        });
}

StreamResult run_model_stream(const sde::DiffusionModel& model, std::span<const double> x0,
                              double step, std::int64_t n_skip, std::int64_t n_accum,
                              const std::function<double(std::span<const double>)>& f,
                              std::uint64_t seed, std::int64_t replicate_id) {
    if (!(step > 0.0)) throw argument_error("run_model_stream: step must be > 0");
    const int d = model.dim;
    StreamResult res;
    rng::NormalStream stream(seed, static_cast<std::uint64_t>(replicate_id),
                             rng::Domain::noise);
    std::vector<double> x(x0.begin(), x0.end());
    std::vector<double> drift(static_cast<std::size_t>(d));
    std::vector<double> sig(static_cast<std::size_t>(d) * d);
    std::vector<double> zz(static_cast<std::size_t>(d));
    const double sqrt_h = std::sqrt(step);
    const std::int64_t n_total = n_skip + n_accum;
    double sum = 0.0;
    for (std::int64_t k = 0; k < n_total; ++k) {
        if (k >= n_skip) sum += f(x);
        model.drift(x, drift);
        model.diffusion(x, sig);
        for (int b = 0; b < d; ++b) zz[static_cast<std::size_t>(b)] = sqrt_h * stream.next();
        for (int a = 0; a < d; ++a) {
            double accum = x[static_cast<std::size_t>(a)] +
                           step * drift[static_cast<std::size_t>(a)];
            const double* row = sig.data() + static_cast<std::size_t>(a) * d;
            for (int b = 0; b < d; ++b) accum += row[b] * zz[static_cast<std::size_t>(b)];
            x[static_cast<std::size_t>(a)] = accum;
        }
        bool ok = true;
        double n2 = 0.0;
        for (double v : x) {
            if (!std::isfinite(v)) ok = false;
            n2 += v * v;
        }
        if (!ok || n2 > sde::kDivergenceRadius * sde::kDivergenceRadius) {
            res.diverged = true;
            res.sum = std::numeric_limits<double>::quiet_NaN();
            res.final_state.assign(static_cast<std::size_t>(d),
                                   std::numeric_limits<double>::quiet_NaN());
            return res;
        }
    }
    res.sum = sum;
    res.final_state = x;
    return res;
}

void parallel_for_replicates(std::int64_t count, int threads,
                             const std::function<void(std::int64_t)>& fn) {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    std::int64_t nthreads = threads > 0 ? threads : static_cast<std::int64_t>(hw);
    nthreads = std::min<std::int64_t>(nthreads, count);
    if (nthreads <= 1) {
        for (std::int64_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nthreads));
    std::exception_ptr first_error;
    std::mutex err_mutex;
    for (std::int64_t t = 0; t < nthreads; ++t) {
        pool.emplace_back([&, t]() {
            try {
                for (std::int64_t i = t; i < count; i += nthreads) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace ergolab::engine
