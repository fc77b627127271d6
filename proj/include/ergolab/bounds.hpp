#pragma once

#include <optional>
#include <string>
#include <utility>

namespace ergolab::bounds {

struct PACRequest {
    double epsilon = 0.0;
    double delta = 0.0;
    void validate() const;  // epsilon > 0, delta in (0,1)
};

enum class Provenance { Default, Calibrated };

struct ConstVal {
    double value = 1.0;
    Provenance prov = Provenance::Default;
};

// The inequalities' existence-only constants, with provenance tracking. All
// default to 1; the concentration lab can overwrite them with calibrated
// values. iota_dd is the rate constant iota'' in (0, iota'); when a model is
// in scope, for_model() replaces the bare default with half of the model's
// iota'.
struct CalibrationConstants {
    ConstVal W;         // moment-bound constant (continuous)
    ConstVal D;         // moment-bound constant (discrete)
    ConstVal C_tv;      // TV-bound prefactor (ULA)
    ConstVal C_burnin;  // burn-in constant C = C(q+) c(iota'') |V|_L1(nu)
    ConstVal c_small;   // admissible-u constant for the bounded-f inequality
    ConstVal iota_dd;

    static CalibrationConstants defaults() { return {}; }

    // Defaults with iota'' = iota'/2 for the given subexponential rate iota'.
    static CalibrationConstants for_iota_prime(double iota_prime_value) {
        CalibrationConstants c;
        c.iota_dd.value = 0.5 * iota_prime_value;
        return c;
    }
};

// Rate exponent: 1-q+ for eta = 0, else 1/2 + (eta+q'+q+1)/(1-q+).
double rate_exponent(double eta, double q, double q_prime);

// c(q, iota'') = ((1+q+)/(1-q+))^{1/(1-q+)} ((1-q+) iota''/(1+q+))^{(1+q+)/(2(1-q+))} / 2
double cattiaux_c(double q, double iota_dd);

// Continuous-data sample length Psi(eps, delta); regime bounds on delta are
// enforced per branch.
double sample_length_continuous(const PACRequest& req, double eta, double q,
                                double q_prime, double L,
                                const CalibrationConstants& consts);

// c_{q+} from the stationary moment bound, scaled by E^mu[V_{q+}(X_0)].
double mu_moment_constant(double q, double iota, double V_expectation);

struct DiscreteExponentChoice {
    double alpha = 0.0;
    double gamma_tilde = 0.0;
    std::optional<double> r;  // unset when q = -1
    double rho = 0.0;
    double sigma_tilde = 0.0;  // filled by the sample-size calculators
};

// Picks (gamma_tilde, r) feasible for the discrete moment bound, minimizing
// rho over r in [1.05, 20] (step 0.05) unless forced_r pins it.
DiscreteExponentChoice choose_discrete_exponents(double q, double q_prime, double eta2,
                                                 double eta3,
                                                 std::optional<double> forced_r = {});

// Discrete-data sample size Psi(Delta, eps, delta); requires delta < e^-2 and
// Delta < eps/(3 e D).
std::pair<double, DiscreteExponentChoice> sample_size_discrete(
    const PACRequest& req, double delta_step, double eta1, double q, double q_prime,
    double eta2, double eta3, const CalibrationConstants& consts);

// Phi(n, Delta, p) = D (sqrt(n) Delta^{3/2} + Delta p^rho + p^{sigma~}).
double discrete_moment_bound(double n, double delta_step, double p,
                             const CalibrationConstants& consts,
                             const DiscreteExponentChoice& choice, double eta1, double q,
                             double q_prime);

// kappa(q, eta) = 2(1-q+)/(6 eta + 2q + 3 - q+).
double kappa(double q, double eta);

// Restricted-eigenvalue sample length T0(eps0, s, c0, c).
double lasso_T0(double eps0, long long s, double c0, double c, double q, double eta,
                long long d, double e_inf);

// lambda >= 2 sqrt((2 D_inf + e_inf)/T * log(6N/eps0)).
double lasso_lambda_min(double T, long long N, double eps0, double D_inf, double e_inf);

struct UlaTuning {
    double delta_step = 0.0;
    double n = 0.0;  // ceil(Psi(Delta, eps, delta/4)); may exceed 2^63, kept real
    double m = 0.0;
    // Diagnostics: the individual step-size caps before the 0.9 safety factor.
    double cap_regime = 0.0;   // eps/(3 e D)
    double cap_exponent = 0.0; // (log 1/delta)^{sigma~ - rho}
    double cap_pinsker = 0.0;  // the (delta*eps)^2 cap
    DiscreteExponentChoice choice;
};

// Step-size / sample-size / burn-in tuning for the ULA estimator. q in (0,1).
// grad_sup enters the Pinsker cap linearly and the TV bound squared, matching
// the two displays.
UlaTuning ula_tuning(const PACRequest& req, double q, double eta1, double eta2,
                     double eta3, long long d, double L_lip, double grad_sup,
                     const CalibrationConstants& consts);

// TV distance bound: C_tv nu(V_q) exp(-(iota'' n Delta)^{(1-q)/(1+q)})
//                   + sqrt((1+grad_sup^2) d L^2 n Delta^2 / 2).
double ula_tv_bound(double n, double delta_step, double nu_Vq, double q, long long d,
                    double L_lip, double grad_sup, const CalibrationConstants& consts);

}  // namespace ergolab::bounds
