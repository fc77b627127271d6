#include "ergolab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ergolab/errors.hpp"

namespace ergolab::bounds {

namespace {

constexpr double kE = 2.718281828459045235360287471352662498;

double q_plus(double q) { return q > 0.0 ? q : 0.0; }

void require_q(double q) {
    if (!(q >= -1.0 && q < 1.0)) throw argument_error("q must be in [-1, 1)");
}

}  // namespace

void PACRequest::validate() const {
    if (!(epsilon > 0.0)) throw argument_error("epsilon must be > 0");
    if (!(delta > 0.0 && delta < 1.0)) throw argument_error("delta must be in (0,1)");
}

double rate_exponent(double eta, double q, double q_prime) {
    require_q(q);
    if (!(eta >= 0.0)) throw argument_error("eta must be >= 0");
    if (!(q_prime >= 0.0)) throw argument_error("q_prime must be >= 0");
    double qp = q_plus(q);
    if (eta == 0.0) return 1.0 - qp;
    return 0.5 + (eta + q_prime + q + 1.0) / (1.0 - qp);
}

double cattiaux_c(double q, double iota_dd) {
    require_q(q);
    if (!(iota_dd > 0.0)) throw argument_error("iota'' must be > 0");
    double qp = q_plus(q);
    if (1.0 - qp < 1e-14) throw argument_error("q+ too close to 1");
    double f1 = std::pow((1.0 + qp) / (1.0 - qp), 1.0 / (1.0 - qp));
    double f2 = std::pow((1.0 - qp) * iota_dd / (1.0 + qp), (1.0 + qp) / (2.0 * (1.0 - qp)));
    return f1 * f2 / 2.0;
}

double sample_length_continuous(const PACRequest& req, double eta, double q,
                                double q_prime, double L,
                                const CalibrationConstants& consts) {
    req.validate();
    require_q(q);
    if (!(L > 0.0)) throw argument_error("L must be > 0");
    double qp = q_plus(q);
    if (eta == 0.0) {
        double regime =
            2.0 * std::exp(-consts.c_small.value * (1.0 + qp) *
                           std::pow(1.0 - qp, -(1.0 - qp) / 2.0));
        if (!(req.delta < regime))
            throw regime_error("delta outside the bounded-f regime (need delta < " +
                               std::to_string(regime) + ")");
        double c = cattiaux_c(q, consts.iota_dd.value);
        double num = std::pow(std::log(2.0 / req.delta), 1.0 / (1.0 - qp)) / c + 1.0;
        double den = std::min(1.0, req.epsilon / (2.0 * L));
        return std::pow(num / den, 2.0);
    }
    if (!(req.delta < std::exp(-2.0)))
        throw regime_error("delta must be < e^-2 for polynomially growing f");
    double expo = rate_exponent(eta, q, q_prime);
    double val = kE * L * consts.W.value * std::pow(std::log(1.0 / req.delta), expo) /
                 req.epsilon;
    return val * val;
}

double mu_moment_constant(double q, double iota, double V_expectation) {
    require_q(q);
    if (!(iota > 0.0)) throw argument_error("iota must be > 0");
    if (!(V_expectation >= 1.0)) throw argument_error("V expectation must be >= 1");
    double qp = q_plus(q);
    double a = std::exp(kE / 2.0 + (1.0 - qp) / 12.0);
    double b = std::pow((1.0 - qp) * iota * kE, -1.0 / (1.0 - qp));
    double c = std::sqrt(2.0 * M_PI / (1.0 - qp));
    return a * b * c * V_expectation;
}

namespace {

double rho_of(double gamma_tilde, double alpha, double eta2, double qp) {
    return std::max((gamma_tilde + 2.0 * alpha + 1.0 - qp) / 2.0, eta2 + 1.0 - qp) /
           (1.0 - qp);
}

}  // namespace

DiscreteExponentChoice choose_discrete_exponents(double q, double q_prime, double eta2,
                                                 double eta3,
                                                 std::optional<double> forced_r) {
    require_q(q);
    if (!(q_prime >= 0.0 && eta2 >= 0.0 && eta3 >= 0.0))
        throw argument_error("exponents must be >= 0");
    DiscreteExponentChoice out;
    out.alpha = std::max(q_prime + eta2, eta3);
    double qp = q_plus(q);
    if (q == -1.0) {
        out.gamma_tilde = out.alpha;
        out.rho = rho_of(out.gamma_tilde, out.alpha, eta2, qp);
        out.sigma_tilde = std::numeric_limits<double>::quiet_NaN();
        return out;
    }
    auto eval_r = [&](double r) {
        double gamma = (1.0 + q) +
                       r * std::max(out.alpha, (1.0 + q) / (r - 1.0)) * (1.0 + 1e-6);
        return std::pair<double, double>{gamma, rho_of(gamma, out.alpha, eta2, qp)};
    };
    double best_r = 0.0, best_gamma = 0.0;
    double best_rho = std::numeric_limits<double>::infinity();
    if (forced_r) {
        if (!(*forced_r > 1.0)) throw argument_error("forced r must be > 1");
        auto [g, rho] = eval_r(*forced_r);
        best_r = *forced_r;
        best_gamma = g;
        best_rho = rho;
    } else {
        for (int i = 0; i <= 379; ++i) {
            double r = 1.05 + 0.05 * i;  // [1.05, 20]
            auto [g, rho] = eval_r(r);
            if (rho < best_rho) {
                best_rho = rho;
                best_r = r;
                best_gamma = g;
            }
        }
    }
    out.r = best_r;
    out.gamma_tilde = best_gamma;
    out.rho = best_rho;
    out.sigma_tilde = std::numeric_limits<double>::quiet_NaN();
    return out;
}

std::pair<double, DiscreteExponentChoice> sample_size_discrete(
    const PACRequest& req, double delta_step, double eta1, double q, double q_prime,
    double eta2, double eta3, const CalibrationConstants& consts) {
    req.validate();
    if (!(delta_step > 0.0)) throw argument_error("Delta must be > 0");
    if (!(req.delta < std::exp(-2.0)))
        throw regime_error("delta must be < e^-2 for the discrete sample size");
    double D = consts.D.value;
    if (!(delta_step < req.epsilon / (3.0 * kE * D)))
        throw regime_error("Delta must be < eps/(3 e D)");
    auto choice = choose_discrete_exponents(q, q_prime, eta2, eta3);
    choice.sigma_tilde = rate_exponent(eta1, q, q_prime);
    double logd = std::log(1.0 / req.delta);
    double branch = std::max(delta_step * std::pow(logd, choice.rho),
                             std::pow(logd, choice.sigma_tilde));
    double val = 3.0 * kE * D * branch / req.epsilon;
    return {val * val / delta_step, choice};
}

double discrete_moment_bound(double n, double delta_step, double p,
                             const CalibrationConstants& consts,
                             const DiscreteExponentChoice& choice, double eta1, double q,
                             double q_prime) {
    if (!(n >= 1.0)) throw argument_error("n must be >= 1");
    if (!(delta_step >= 0.0)) throw argument_error("Delta must be >= 0");
    if (!(p >= 2.0)) throw argument_error("p must be >= 2");
    double st = rate_exponent(eta1, q, q_prime);
    return consts.D.value * (std::sqrt(n) * std::pow(delta_step, 1.5) +
                             delta_step * std::pow(p, choice.rho) + std::pow(p, st));
}

double kappa(double q, double eta) {
    require_q(q);
    if (!(eta >= 0.0 && eta <= 1.0)) throw argument_error("eta must be in [0,1]");
    double qp = q_plus(q);
    return 2.0 * (1.0 - qp) / (6.0 * eta + 2.0 * q + 3.0 - qp);
}

double lasso_T0(double eps0, long long s, double c0, double c, double q, double eta,
                long long d, double e_inf) {
    if (!(eps0 > 0.0 && eps0 < 1.0)) throw argument_error("eps0 must be in (0,1)");
    if (s < 1) throw argument_error("s must be >= 1");
    if (!(c0 > 0.0 && c > 0.0)) throw argument_error("c0, c must be > 0");
    if (d < 1) throw argument_error("d must be >= 1");
    if (!(e_inf > 0.0)) throw argument_error("e_inf must be > 0");
    double k = kappa(q, eta);
    double ds = static_cast<double>(d);
    double ss = static_cast<double>(s);
    // log(21^{2s} * min(d, (e d / (2s))^{2s})) evaluated in logs.
    double log_combi = std::min(std::log(ds), 2.0 * ss * std::log(kE * ds / (2.0 * ss)));
    double bracket = 2.0 * ss * std::log(21.0) + log_combi - std::log(eps0);
    return std::pow(bracket, 2.0 / k) *
           (324.0 * (c0 + 2.0) * (c0 + 2.0) * kE * kE * c * c) / (e_inf * e_inf);
}

double lasso_lambda_min(double T, long long N, double eps0, double D_inf, double e_inf) {
    if (!(T > 0.0)) throw argument_error("T must be > 0");
    if (N < 1) throw argument_error("N must be >= 1");
    if (!(eps0 > 0.0)) throw argument_error("eps0 must be > 0");
    double arg = 6.0 * static_cast<double>(N) / eps0;
    if (!(arg > 1.0)) throw argument_error("6N/eps0 must exceed 1");
    return 2.0 * std::sqrt((2.0 * D_inf + e_inf) / T * std::log(arg));
}

UlaTuning ula_tuning(const PACRequest& req, double q, double eta1, double eta2,
                     double eta3, long long d, double L_lip, double grad_sup,
                     const CalibrationConstants& consts) {
    req.validate();
    if (!(q > 0.0 && q < 1.0)) throw argument_error("ULA tuning needs q in (0,1)");
    if (d < 1) throw argument_error("d must be >= 1");
    if (!(L_lip > 0.0)) throw argument_error("L_lip must be > 0");
    if (!(grad_sup >= 0.0) || !std::isfinite(grad_sup))
        throw regime_error("ULA tuning needs a finite gradient sup bound");

    UlaTuning out;
    out.choice = choose_discrete_exponents(q, /*q_prime=*/0.0, eta2, eta3);
    out.choice.sigma_tilde = rate_exponent(eta1, q, /*q_prime=*/0.0);
    const double st = out.choice.sigma_tilde;
    const double rho = out.choice.rho;
    const double logd = std::log(1.0 / req.delta);
    const double iota_dd = consts.iota_dd.value;

    out.cap_regime = req.epsilon / (3.0 * kE * consts.D.value);
    out.cap_exponent = std::pow(logd, st - rho);
    double log4d = std::log(4.0 / req.delta);
    double log4C = std::log(4.0 * consts.C_burnin.value / req.delta);
    if (!(log4C > 0.0)) throw regime_error("log(4C/delta) must be positive");
    double tail_term = std::pow(log4C, (1.0 + q) / (1.0 - q)) / iota_dd;
    double denom = 2.0 * (1.0 + grad_sup) * static_cast<double>(d) * L_lip * L_lip *
                   (std::pow(log4d, 2.0 * st) +
                    req.epsilon * req.epsilon * (2.0 + tail_term));
    out.cap_pinsker = (req.delta * req.epsilon) * (req.delta * req.epsilon) / denom;

    double cap = std::min({1.0, out.cap_regime, out.cap_exponent, out.cap_pinsker});
    if (!(cap > 0.0) || !std::isfinite(cap))
        throw regime_error("ULA tuning infeasible: step-size caps are not positive");
    out.delta_step = 0.9 * cap;

    PACRequest quarter{req.epsilon, req.delta / 4.0};
    auto [psi, choice] = sample_size_discrete(quarter, out.delta_step, eta1, q,
                                              /*q_prime=*/0.0, eta2, eta3, consts);
    out.choice = choice;
    out.n = std::ceil(psi);
    out.m = std::ceil(tail_term / out.delta_step);
    return out;
}

double ula_tv_bound(double n, double delta_step, double nu_Vq, double q, long long d,
                    double L_lip, double grad_sup, const CalibrationConstants& consts) {
    if (!(n >= 0.0)) throw argument_error("n must be >= 0");
    if (!(delta_step >= 0.0)) throw argument_error("Delta must be >= 0");
    if (!(nu_Vq >= 1.0)) throw argument_error("nu(V_q) must be >= 1");
    if (!(q > 0.0 && q < 1.0)) throw argument_error("q must be in (0,1)");
    double mix = std::exp(-std::pow(consts.iota_dd.value * n * delta_step,
                                    (1.0 - q) / (1.0 + q)));
    double pinsker = std::sqrt((1.0 + grad_sup * grad_sup) * static_cast<double>(d) *
                               L_lip * L_lip * n * delta_step * delta_step / 2.0);
    return consts.C_tv.value * nu_Vq * mix + pinsker;
}

}  // namespace ergolab::bounds
