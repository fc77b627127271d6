#include "ergolab/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "ergolab/errors.hpp"
#include "ergolab/io.hpp"
#include "ergolab/kernels.hpp"
#include "ergolab/numeric.hpp"
#include "ergolab/rng.hpp"

namespace ergolab::lasso {

Dictionary build_dictionary(int d, std::vector<DictBlock> blocks) {
    if (d < 1) throw argument_error("dictionary: d >= 1");
    if (blocks.empty()) throw argument_error("dictionary: need at least one block");
    for (const auto& b : blocks) {
        if (!(b.alpha_tilde > 0.0)) throw argument_error("dictionary: alpha~ must be > 0");
        if (!(b.q_tilde >= -1.0 && b.q_tilde < 1.0))
            throw argument_error("dictionary: q~ must be in [-1,1)");
    }
    Dictionary dict;
    dict.d = d;
    dict.blocks = std::move(blocks);
    dict.N = static_cast<int>(dict.blocks.size()) * d * d;
    dict.eta = 0.0;
    for (const auto& b : dict.blocks) dict.eta = std::max(dict.eta, std::max(-b.q_tilde, 0.0));
    return dict;
}

void Dictionary::eval_psi(std::span<const double> x, std::span<double> out) const {
    const double nx = norm2(x);
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const double w = std::pow(blocks[b].alpha_tilde + nx, -(blocks[b].q_tilde + 1.0));
        const int base = static_cast<int>(b) * d * d;
        for (int row = 0; row < d; ++row)
            for (int col = 0; col < d; ++col) {
                int i = base + row * d + col;
                out[static_cast<std::size_t>(row) * N + i] =
                    x[static_cast<std::size_t>(col)] * w;
            }
    }
}

double dictionary_growth_constant(const Dictionary& dict, double max_radius, int n_probes,
                                  std::uint64_t seed) {
    rng::NormalStream stream(seed, 2, rng::Domain::probe);
    std::vector<double> x(static_cast<std::size_t>(dict.d));
    std::vector<double> psi(static_cast<std::size_t>(dict.d) * dict.N);
    double worst = 0.0;
    for (int p = 0; p < n_probes; ++p) {
        double r = max_radius * stream.next_uniform();
        double n = 0.0;
        for (auto& v : x) {
            v = stream.next();
            n += v * v;
        }
        n = std::sqrt(n);
        if (n > 0)
            for (auto& v : x) v *= r / n;
        dict.eval_psi(x, psi);
        if (!all_finite(psi)) throw numerical_error("dictionary non-finite at probe");
        // lambda_max(psi^T psi) = squared spectral norm of psi.
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                       Eigen::RowMajor>>
            m(psi.data(), dict.d, dict.N);
        Eigen::MatrixXd gram = m * m.transpose();  // d x d, same nonzero spectrum
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
        double lmax = es.eigenvalues().maxCoeff();
        worst = std::max(worst, lmax / (1.0 + std::pow(r, 2.0 * dict.eta)));
    }
    return worst;
}

std::function<void(std::span<const double>, std::span<double>)> drift_from_dictionary(
    const Dictionary& dict, std::vector<double> theta) {
    if (static_cast<int>(theta.size()) != dict.N)
        throw argument_error("drift_from_dictionary: theta size mismatch");
    return [dict, theta = std::move(theta)](std::span<const double> x,
                                            std::span<double> out) {
        const double nx = norm2(x);
        std::fill(out.begin(), out.end(), 0.0);
        for (std::size_t b = 0; b < dict.blocks.size(); ++b) {
            const double w =
                std::pow(dict.blocks[b].alpha_tilde + nx, -(dict.blocks[b].q_tilde + 1.0));
            const int base = static_cast<int>(b) * dict.d * dict.d;
            for (int row = 0; row < dict.d; ++row) {
                double acc = 0.0;
                for (int col = 0; col < dict.d; ++col)
                    acc += theta[static_cast<std::size_t>(base + row * dict.d + col)] *
                           x[static_cast<std::size_t>(col)];
                out[static_cast<std::size_t>(row)] += acc * w;
            }
        }
    };
}

SigmaField constant_sigma(int d, double sigma) {
    if (!(sigma > 0.0)) throw argument_error("constant_sigma: sigma > 0");
    SigmaField f;
    f.constant = true;
    f.eval = [d, sigma](std::span<const double>, std::span<double> out) {
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                out[static_cast<std::size_t>(i) * d + j] = (i == j) ? sigma : 0.0;
    };
    return f;
}

GramSystem gram_and_target(const sde::Trajectory& traj, const Dictionary& dict,
                           const SigmaField& sigma0) {
    if (traj.dim != dict.d) throw argument_error("gram: trajectory/dictionary dim mismatch");
    if (traj.n_states() < 2) throw argument_error("gram: empty trajectory");
    const int d = dict.d;
    const int N = dict.N;
    const auto n = traj.n_steps();

    GramSystem sys;
    sys.N = N;
    sys.T = traj.horizon();
    sys.Psi.assign(static_cast<std::size_t>(N) * N, 0.0);
    sys.h.assign(static_cast<std::size_t>(N), 0.0);

    std::vector<double> sig(static_cast<std::size_t>(d) * d);
    std::vector<double> siginv_cols;           // sigma^{-1} (row-major), refreshed per step
    std::vector<double> psi(static_cast<std::size_t>(d) * N);
    std::vector<double> phi(static_cast<std::size_t>(d) * N);
    std::vector<double> e(static_cast<std::size_t>(d));
    std::vector<double> lu;

    bool have_const_inv = false;
    auto invert_sigma = [&](std::span<const double> x) {
        if (sigma0.constant && have_const_inv) return;
        sigma0.eval(x, sig);
        siginv_cols.assign(static_cast<std::size_t>(d) * d, 0.0);
        for (int i = 0; i < d; ++i) siginv_cols[static_cast<std::size_t>(i) * d + i] = 1.0;
        lu = sig;
        try {
            lu_solve_multi_inplace(lu, siginv_cols, d, d);
        } catch (const numerical_error&) {
            throw numerical_error("gram: singular sigma0 along the path");
        }
        have_const_inv = true;
    };

    const auto& kern = simd::kernels();
    for (std::size_t k = 0; k < n; ++k) {
        auto x = traj.state(k);
        auto x_next = traj.state(k + 1);
        invert_sigma(x);
        dict.eval_psi(x, psi);
        // phi = sigma^{-1} psi (d x N), e = sigma^{-1} dx.
        for (int a = 0; a < d; ++a) {
            const double* srow = siginv_cols.data() + static_cast<std::size_t>(a) * d;
            double acc_e = 0.0;
            for (int b = 0; b < d; ++b)
                acc_e += srow[b] * (x_next[static_cast<std::size_t>(b)] -
                                    x[static_cast<std::size_t>(b)]);
            e[static_cast<std::size_t>(a)] = acc_e;
            double* prow = phi.data() + static_cast<std::size_t>(a) * N;
            for (int i = 0; i < N; ++i) {
                double acc = 0.0;
                for (int b = 0; b < d; ++b)
                    acc += srow[b] * psi[static_cast<std::size_t>(b) * N + i];
                prow[i] = acc;
            }
        }
        kern.gram_rank_update(sys.Psi.data(), phi.data(), static_cast<std::size_t>(N),
                              static_cast<std::size_t>(d));
        for (int a = 0; a < d; ++a) {
            const double* prow = phi.data() + static_cast<std::size_t>(a) * N;
            const double ea = e[static_cast<std::size_t>(a)];
            for (int i = 0; i < N; ++i) sys.h[static_cast<std::size_t>(i)] += prow[i] * ea;
        }
    }

    const double wq = traj.step / sys.T;
    for (int i = 0; i < N; ++i)
        for (int j = i; j < N; ++j) {
            double v = sys.Psi[static_cast<std::size_t>(i) * N + j] * wq;
            sys.Psi[static_cast<std::size_t>(i) * N + j] = v;
            sys.Psi[static_cast<std::size_t>(j) * N + i] = v;
        }
    for (auto& v : sys.h) v /= sys.T;
    if (!all_finite(sys.Psi) || !all_finite(sys.h))
        throw numerical_error("gram: non-finite entries");
    return sys;
}

namespace {

Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigensolve(const GramSystem& sys) {
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
        m(sys.Psi.data(), sys.N, sys.N);
    Eigen::MatrixXd a = 0.5 * (m + m.transpose());
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(a);
}

}  // namespace

double lambda_min_sym(const GramSystem& sys) {
    return eigensolve(sys).eigenvalues().minCoeff();
}

double max_diagonal(const GramSystem& sys) {
    double m = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < sys.N; ++i) m = std::max(m, sys.psi_at(i, i));
    return m;
}

double psd_relative_margin(const GramSystem& sys) {
    auto es = eigensolve(sys);
    double lmin = es.eigenvalues().minCoeff();
    double scale = es.eigenvalues().cwiseAbs().maxCoeff();
    if (scale == 0.0) return 0.0;
    return lmin / scale;
}

LassoFit lasso_solve(const GramSystem& sys, double lambda, double tol,
                     std::int64_t max_sweeps) {
    if (!(lambda >= 0.0)) throw argument_error("lasso_solve: lambda >= 0");
    if (!(tol > 0.0)) throw argument_error("lasso_solve: tol > 0");
    const int N = sys.N;
    for (int i = 0; i < N; ++i)
        if (!(sys.psi_at(i, i) > 0.0))
            throw argument_error("lasso_solve: nonpositive diagonal at " + std::to_string(i));

    std::vector<double> theta(static_cast<std::size_t>(N), 0.0);
    std::vector<double> q(static_cast<std::size_t>(N), 0.0);  // Psi theta

    auto objective = [&]() {
        double v = 0.0;
        for (int i = 0; i < N; ++i)
            v += theta[static_cast<std::size_t>(i)] *
                 (q[static_cast<std::size_t>(i)] - 2.0 * sys.h[static_cast<std::size_t>(i)]);
        double l1 = 0.0;
        for (double t : theta) l1 += std::fabs(t);
        return v + lambda * l1;
    };

    double prev_obj = objective();
    std::int64_t sweep = 0;
    bool converged = false;
    for (; sweep < max_sweeps; ++sweep) {
        double max_change = 0.0;
        for (int i = 0; i < N; ++i) {
            double z = sys.h[static_cast<std::size_t>(i)] - q[static_cast<std::size_t>(i)] +
                       sys.psi_at(i, i) * theta[static_cast<std::size_t>(i)];
            double thr = lambda / 2.0;
            double t_new = 0.0;
            if (z > thr)
                t_new = (z - thr) / sys.psi_at(i, i);
            else if (z < -thr)
                t_new = (z + thr) / sys.psi_at(i, i);
            double dt = t_new - theta[static_cast<std::size_t>(i)];
            if (dt != 0.0) {
                const double* col = sys.Psi.data() + static_cast<std::size_t>(i) * N;
                for (int j = 0; j < N; ++j) q[static_cast<std::size_t>(j)] += col[j] * dt;
                theta[static_cast<std::size_t>(i)] = t_new;
            }
            max_change = std::max(max_change, std::fabs(dt));
        }
        double obj = objective();
        if (obj > prev_obj + 1e-10 * (1.0 + std::fabs(prev_obj)))
            throw numerical_error("lasso_solve: objective increased within a sweep");
        prev_obj = obj;
        if (max_change <= tol) {
            ++sweep;
            converged = true;
            break;
        }
    }

    LassoFit fit;
    fit.theta = theta;
    fit.lambda = lambda;
    fit.sweeps = sweep;
    fit.objective = prev_obj;
    double kkt = 0.0;
    for (int i = 0; i < N; ++i) {
        double g = 2.0 * (q[static_cast<std::size_t>(i)] - sys.h[static_cast<std::size_t>(i)]);
        double viol;
        if (theta[static_cast<std::size_t>(i)] != 0.0)
            viol = std::fabs(g + lambda * (theta[static_cast<std::size_t>(i)] > 0 ? 1.0 : -1.0));
        else
            viol = std::max(std::fabs(g) - lambda, 0.0);
        kkt = std::max(kkt, viol);
    }
    fit.kkt_residual = kkt;
    if (!converged && kkt > 100.0 * tol)
        throw numerical_error("lasso_solve: no convergence after " +
                              std::to_string(max_sweeps) + " sweeps (kkt=" +
                              std::to_string(kkt) + ")");
    return fit;
}

bool cone_member(std::span<const double> z, int s, double c0) {
    const int N = static_cast<int>(z.size());
    if (s < 1 || s > N) throw argument_error("cone_member: 1 <= s <= N");
    std::vector<int> idx(static_cast<std::size_t>(N));
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        double fa = std::fabs(z[static_cast<std::size_t>(a)]);
        double fb = std::fabs(z[static_cast<std::size_t>(b)]);
        if (fa != fb) return fa > fb;
        return a < b;  // ties: lowest index first
    });
    double l1 = 0.0, l1_top = 0.0;
    for (double v : z) l1 += std::fabs(v);
    for (int k = 0; k < s; ++k) l1_top += std::fabs(z[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])]);
    return l1 <= (1.0 + c0) * l1_top;
}

ReProbe restricted_eigenvalue_probe(const GramSystem& sys, int s, double c0,
                                    std::int64_t n_probe, std::uint64_t seed) {
    const int N = sys.N;
    if (s < 1 || s > N) throw argument_error("re probe: 1 <= s <= N");
    if (n_probe < 100) throw argument_error("re probe: n_probe >= 100");
    if (!(c0 > 0.0)) throw argument_error("re probe: c0 > 0");

    ReProbe out;
    out.min_quotient = std::numeric_limits<double>::infinity();

    auto consider = [&](const std::vector<double>& z) {
        double zz = 0.0;
        for (double v : z) zz += v * v;
        if (!(zz > 0.0)) return;
        double quad = 0.0;
        for (int i = 0; i < N; ++i) {
            const double* row = sys.Psi.data() + static_cast<std::size_t>(i) * N;
            double acc = 0.0;
            for (int j = 0; j < N; ++j) acc += row[j] * z[static_cast<std::size_t>(j)];
            quad += z[static_cast<std::size_t>(i)] * acc;
        }
        double quot = quad / zz;
        if (quot < out.min_quotient) {
            out.min_quotient = quot;
            out.argmin = z;
        }
    };

    // Signed axis vectors: the sparsest cone members and frequent minimizers.
    std::vector<double> z(static_cast<std::size_t>(N), 0.0);
    for (int i = 0; i < N; ++i) {
        for (double sgn : {1.0, -1.0}) {
            std::fill(z.begin(), z.end(), 0.0);
            z[static_cast<std::size_t>(i)] = sgn;
            consider(z);
        }
    }

    rng::NormalStream stream(seed, 3, rng::Domain::cone);
    std::vector<int> support(static_cast<std::size_t>(s));
    for (std::int64_t p = 0; p < n_probe; ++p) {
        // Random size-s support without replacement.
        std::fill(z.begin(), z.end(), 0.0);
        int chosen = 0;
        while (chosen < s) {
            int cand = static_cast<int>(stream.next_index(static_cast<std::uint64_t>(N)));
            bool dup = false;
            for (int k = 0; k < chosen; ++k)
                if (support[static_cast<std::size_t>(k)] == cand) dup = true;
            if (!dup) support[static_cast<std::size_t>(chosen++)] = cand;
        }
        double min_core = std::numeric_limits<double>::infinity();
        double core_l1 = 0.0;
        for (int k = 0; k < s; ++k) {
            double v = stream.next();
            if (v == 0.0) v = 1.0;
            z[static_cast<std::size_t>(support[static_cast<std::size_t>(k)])] = v;
            min_core = std::min(min_core, std::fabs(v));
            core_l1 += std::fabs(v);
        }
        // Dense tail scaled to the cone boundary, capped below the smallest
        // core entry so the top-s set stays on the core.
        double tail_l1 = 0.0, tail_max = 0.0;
        std::vector<double> tail(static_cast<std::size_t>(N), 0.0);
        for (int i = 0; i < N; ++i) {
            bool on_core = false;
            for (int k = 0; k < s; ++k)
                if (support[static_cast<std::size_t>(k)] == i) on_core = true;
            if (on_core) continue;
            double v = stream.next();
            tail[static_cast<std::size_t>(i)] = v;
            tail_l1 += std::fabs(v);
            tail_max = std::max(tail_max, std::fabs(v));
        }
        if (tail_l1 > 0.0 && N > s) {
            double scale = std::min(c0 * core_l1 / tail_l1,
                                    0.999 * min_core / tail_max) *
                           (1.0 - 1e-12);
            if (scale > 0.0)
                for (int i = 0; i < N; ++i) z[static_cast<std::size_t>(i)] += scale * tail[static_cast<std::size_t>(i)];
        }
        if (!cone_member(z, s, c0))
            throw numerical_error("re probe: constructed vector left the cone");
        consider(z);
    }
    return out;
}

OracleCheck oracle_check(const LassoFit& fit, std::span<const double> theta0,
                         const GramSystem& sys, std::int64_t s0, double e_inf_hat) {
    if (!(e_inf_hat > 0.0)) throw argument_error("oracle_check: e_inf_hat > 0");
    if (static_cast<int>(theta0.size()) != sys.N || static_cast<int>(fit.theta.size()) != sys.N)
        throw argument_error("oracle_check: dimension mismatch");
    OracleCheck out;
    const int N = sys.N;
    std::vector<double> diff(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i)
        diff[static_cast<std::size_t>(i)] =
            fit.theta[static_cast<std::size_t>(i)] - theta0[static_cast<std::size_t>(i)];
    double lhs = 0.0;
    for (int i = 0; i < N; ++i) {
        const double* row = sys.Psi.data() + static_cast<std::size_t>(i) * N;
        double acc = 0.0;
        for (int j = 0; j < N; ++j) acc += row[j] * diff[static_cast<std::size_t>(j)];
        lhs += diff[static_cast<std::size_t>(i)] * acc;
    }
    out.lhs = lhs;
    out.rhs = fit.lambda * fit.lambda * 2.0 * static_cast<double>(s0) / e_inf_hat;
    out.holds = out.lhs <= out.rhs;
    return out;
}

nlohmann::json fit_json(const LassoFit& fit, const nlohmann::json& config) {
    std::vector<int> support;
    for (int i = 0; i < static_cast<int>(fit.theta.size()); ++i)
        if (fit.theta[static_cast<std::size_t>(i)] != 0.0) support.push_back(i);
    nlohmann::json data{{"theta_hat", fit.theta},
                        {"lambda", fit.lambda},
                        {"objective", fit.objective},
                        {"kkt_residual", fit.kkt_residual},
                        {"sweeps", fit.sweeps},
                        {"support", support}};
    return io::envelope(config, std::move(data));
}

std::string fit_csv(const LassoFit& fit, const nlohmann::json& config) {
    std::string out = io::csv_preamble(config);
    out += "index,theta_hat\n";
    for (std::size_t i = 0; i < fit.theta.size(); ++i) {
        out += std::to_string(i);
        out += ",";
        out += io::g17(fit.theta[i]);
        out += "\n";
    }
    return out;
}

}  // namespace ergolab::lasso
