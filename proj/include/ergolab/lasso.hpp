#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ergolab/sde.hpp"

namespace ergolab::lasso {

// One dictionary block: all d^2 elementary-matrix functions with the same
// radial weight (alpha + |x|)^{-(q~+1)}.
struct DictBlock {
    double q_tilde = -1.0;   // in [-1, 1)
    double alpha_tilde = 1.0;  // > 0
};

// Basis psi_i(x) = E_i x (alpha_i + |x|)^{-(q_i+1)} with E_i running row-major
// through the d x d slots inside each block. Index map (0-based):
// block = i / d^2, row = (i % d^2) / d, col = i % d.
struct Dictionary {
    int d = 1;
    std::vector<DictBlock> blocks;
    int N = 0;
    double eta = 0.0;  // max over blocks of (-q~)_+

    int block_of(int i) const { return i / (d * d); }
    int row_of(int i) const { return (i % (d * d)) / d; }
    int col_of(int i) const { return i % d; }

    // psi(x) as a d x N row-major matrix.
    void eval_psi(std::span<const double> x, std::span<double> out) const;
};

Dictionary build_dictionary(int d, std::vector<DictBlock> blocks);

// Probes lambda_max(psi(x)^T psi(x)) / (1 + |x|^{2 eta}) over a radius grid
// and returns the largest ratio seen (the empirical growth constant). Throws
// if any evaluation is non-finite.
double dictionary_growth_constant(const Dictionary& dict, double max_radius = 50.0,
                                  int n_probes = 128, std::uint64_t seed = 0);

// b_theta(x) = sum_i theta_i psi_i(x).
std::function<void(std::span<const double>, std::span<double>)> drift_from_dictionary(
    const Dictionary& dict, std::vector<double> theta);

// Constant-in-x diffusion evaluator for the Gram assembly.
struct SigmaField {
    std::function<void(std::span<const double>, std::span<double>)> eval;  // d x d row-major
    bool constant = true;
};
SigmaField constant_sigma(int d, double sigma);

struct GramSystem {
    int N = 0;
    double T = 0.0;
    std::vector<double> Psi;  // N x N row-major, symmetric
    std::vector<double> h;

    double psi_at(int i, int j) const { return Psi[static_cast<std::size_t>(i) * N + j]; }
};

// Psi_ij = (1/T) sum_k <psi_i, a0^{-1} psi_j>(X_k) * step  (left rule),
// h_i    = (1/T) sum_k <psi_i(X_k), a0^{-1}(X_k) (X_{k+1} - X_k)>  (Ito sum).
GramSystem gram_and_target(const sde::Trajectory& traj, const Dictionary& dict,
                           const SigmaField& sigma0);

// Smallest / largest-diagonal summaries used as plug-ins for the bounds.
double lambda_min_sym(const GramSystem& sys);
double max_diagonal(const GramSystem& sys);
// Most negative eigenvalue relative to the largest magnitude one (PSD slack).
double psd_relative_margin(const GramSystem& sys);

struct LassoFit {
    std::vector<double> theta;
    double lambda = 0.0;
    double objective = 0.0;
    double kkt_residual = 0.0;
    std::int64_t sweeps = 0;
};

// Cyclic coordinate descent with exact scalar soft-threshold updates on
// theta^T Psi theta - 2 theta^T h + lambda |theta|_1.
LassoFit lasso_solve(const GramSystem& sys, double lambda, double tol = 1e-8,
                     std::int64_t max_sweeps = 100000);

struct ReProbe {
    double min_quotient = 0.0;
    std::vector<double> argmin;
};

// Minimum Rayleigh quotient of Psi over sampled members of the cone C(s, c0)
// (random s-sparse cores with boundary-scaled dense tails) plus all 2N signed
// axis vectors.
ReProbe restricted_eigenvalue_probe(const GramSystem& sys, int s, double c0,
                                    std::int64_t n_probe, std::uint64_t seed);

// Membership test for C(s, c0): |z|_1 <= (1+c0) |z restricted to its s largest
// coordinates|_1 (ties resolved to the lowest index).
bool cone_member(std::span<const double> z, int s, double c0);

struct OracleCheck {
    double lhs = 0.0;  // (theta_hat - theta0)^T Psi (theta_hat - theta0)
    double rhs = 0.0;  // lambda^2 * 2 s0 / e_inf_hat
    bool holds = false;
};

OracleCheck oracle_check(const LassoFit& fit, std::span<const double> theta0,
                         const GramSystem& sys, std::int64_t s0, double e_inf_hat);

// --- emission ---------------------------------------------------------------

nlohmann::json fit_json(const LassoFit& fit, const nlohmann::json& config);
std::string fit_csv(const LassoFit& fit, const nlohmann::json& config);

}  // namespace ergolab::lasso
