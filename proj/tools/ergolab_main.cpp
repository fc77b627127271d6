// ergolab: simulate ergodic diffusions, evaluate the concentration/PAC
// calculators, and run the calibration, Lasso and ULA experiments.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ergolab/bounds.hpp"
#include "ergolab/conclab.hpp"
#include "ergolab/engine.hpp"
#include "ergolab/errors.hpp"
#include "ergolab/functionals.hpp"
#include "ergolab/io.hpp"
#include "ergolab/lasso.hpp"
#include "ergolab/numeric.hpp"
#include "ergolab/sde.hpp"
#include "ergolab/ula.hpp"
#include "ergolab/version.hpp"

using nlohmann::json;
using namespace ergolab;

namespace {

std::vector<double> parse_list(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        std::size_t pos = 0;
        double v = std::stod(tok, &pos);
        if (pos != tok.size()) throw argument_error("bad number '" + tok + "' in list");
        out.push_back(v);
    }
    return out;
}

std::vector<int> parse_int_list(const std::string& csv) {
    std::vector<int> out;
    for (double v : parse_list(csv)) out.push_back(static_cast<int>(v));
    return out;
}

// "idx:value,idx:value" sparse vector spec
std::vector<double> parse_sparse(const std::string& spec, int n) {
    std::vector<double> out(static_cast<std::size_t>(n), 0.0);
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        auto colon = tok.find(':');
        if (colon == std::string::npos)
            throw argument_error("sparse entry '" + tok + "' needs idx:value");
        int idx = std::stoi(tok.substr(0, colon));
        double val = std::stod(tok.substr(colon + 1));
        if (idx < 0 || idx >= n) throw argument_error("sparse index out of range");
        out[static_cast<std::size_t>(idx)] = val;
    }
    return out;
}

// "q~:a~;q~:a~" dictionary block list
std::vector<lasso::DictBlock> parse_blocks(const std::string& spec) {
    std::vector<lasso::DictBlock> out;
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ';')) {
        if (tok.empty()) continue;
        auto colon = tok.find(':');
        if (colon == std::string::npos)
            throw argument_error("block '" + tok + "' needs qtilde:alphatilde");
        out.push_back({std::stod(tok.substr(0, colon)), std::stod(tok.substr(colon + 1))});
    }
    return out;
}

struct CommonOpts {
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::string out_path;
    std::string format = "csv";
    int threads = 0;
};

void add_common(CLI::App* cmd, CommonOpts& c) {
    auto* s =
        cmd->add_option("--seed", c.seed, "master seed (env ERGODIC_LAB_SEED fallback)");
    s->each([&c](const std::string&) { c.seed_given = true; });
    cmd->add_option("--out", c.out_path, "output file path");
    cmd->add_option("--format", c.format, "output format")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--threads", c.threads, "worker threads (0 = auto)")
        ->check(CLI::NonNegativeNumber);
}

void resolve_seed(CommonOpts& c) {
    if (c.seed_given) return;
    if (const char* env = std::getenv("ERGODIC_LAB_SEED")) {
        c.seed = std::strtoull(env, nullptr, 10);
        c.seed_given = true;
    }
}

// The destination path is deliberately not part of the echoed config: the
// same experiment written to two paths must produce byte-identical files.
void finish_common(const CommonOpts& c, json& cfg) {
    cfg["seed"] = c.seed;
    cfg["format"] = c.format;
    cfg["threads"] = c.threads;
}

void echo_config(const json& cfg) { std::cerr << "config: " << cfg.dump() << "\n"; }

void emit(const CommonOpts& c, const json&, const std::string& csv, const json& j) {
    if (c.out_path.empty()) return;
    if (c.format == "csv")
        io::atomic_write_file(c.out_path, csv);
    else
        io::atomic_write_file(c.out_path, j.dump(2) + "\n");
}

void print_value(double v) { std::printf("%.10g\n", v); }

struct ConstOpts {
    double W = 1.0, D = 1.0, C_tv = 1.0, C_burnin = 1.0, c_small = 1.0, iota_dd = 1.0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--W", W, "moment constant (continuous)");
        cmd->add_option("--D", D, "moment constant (discrete)");
        cmd->add_option("--C-tv", C_tv, "TV prefactor");
        cmd->add_option("--C-burnin", C_burnin, "burn-in constant C");
        cmd->add_option("--c-small", c_small, "bounded-f admissible-u constant");
        cmd->add_option("--iota-dd", iota_dd, "rate constant iota''");
    }
    bounds::CalibrationConstants build() const {
        bounds::CalibrationConstants c;
        c.W.value = W;
        c.D.value = D;
        c.C_tv.value = C_tv;
        c.C_burnin.value = C_burnin;
        c.c_small.value = c_small;
        c.iota_dd.value = iota_dd;
        return c;
    }
    void echo(json& cfg) const {
        cfg["W"] = W;
        cfg["D"] = D;
        cfg["C-tv"] = C_tv;
        cfg["C-burnin"] = C_burnin;
        cfg["c-small"] = c_small;
        cfg["iota-dd"] = iota_dd;
    }
};

// JSON config file merge: the file supplies defaults, explicit flags win
// (config-derived tokens are inserted before the user's flags).
std::vector<std::string> merge_config(const std::vector<std::string>& args) {
    std::string config_path;
    std::vector<std::string> rest;
    for (std::size_t i = 0; i < args.size(); ++i) {
        const std::string& a = args[i];
        if (a == "--config") {
            if (i + 1 >= args.size()) throw argument_error("--config needs a path");
            config_path = args[++i];
        } else if (a.rfind("--config=", 0) == 0) {
            config_path = a.substr(9);
        } else {
            rest.push_back(a);
        }
    }
    if (config_path.empty()) return rest;

    std::ifstream in(config_path);
    if (!in) throw argument_error("config file '" + config_path + "' not found");
    json cfg;
    try {
        in >> cfg;
    } catch (const std::exception& e) {
        throw argument_error(std::string("config parse error: ") + e.what());
    }
    if (!cfg.is_object()) throw argument_error("config must be a JSON object");

    std::size_t path_len = 0;
    while (path_len < rest.size() && rest[path_len].rfind("-", 0) != 0) ++path_len;

    std::vector<std::string> merged(rest.begin(),
                                    rest.begin() + static_cast<long>(path_len));
    for (auto it = cfg.begin(); it != cfg.end(); ++it) {
        const std::string& key = it.key();
        if (key == "command") continue;  // informational echo field
        std::string value;
        if (it.value().is_string())
            value = it.value().get<std::string>();
        else if (it.value().is_boolean())
            value = it.value().get<bool>() ? "true" : "false";
        else if (it.value().is_number_integer())
            value = std::to_string(it.value().get<long long>());
        else if (it.value().is_number_unsigned())
            value = std::to_string(it.value().get<unsigned long long>());
        else if (it.value().is_number_float())
            value = io::g17(it.value().get<double>());
        else
            throw argument_error("config key '" + key + "' has a non-scalar value");
        merged.push_back("--" + key + "=" + value);
    }
    merged.insert(merged.end(), rest.begin() + static_cast<long>(path_len), rest.end());
    return merged;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string(kVersion) +
                 " - ergodic diffusion functionals, PAC calculators and experiments"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);
    // config-injected tokens precede explicit flags; the last occurrence wins
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    // ---------------- simulate ----------------
    auto* sim = app.add_subcommand("simulate", "Euler-Maruyama path of a registered model");
    static struct {
        std::string model = "ou1d";
        std::string x0;
        double step = sde::kDefaultStep;
        std::int64_t n_steps = 1000;
        std::int64_t replicate = 0;
        CommonOpts com;
    } sim_o;
    sim->add_option("--model", sim_o.model, "model name")
        ->check(CLI::IsMember(sde::registered_models()));
    sim->add_option("--x0", sim_o.x0, "initial state, comma separated (default zeros)");
    sim->add_option("--step", sim_o.step, "Euler step")->check(CLI::PositiveNumber);
    sim->add_option("--n-steps", sim_o.n_steps, "number of steps")
        ->check(CLI::PositiveNumber);
    sim->add_option("--replicate", sim_o.replicate, "replicate id");
    add_common(sim, sim_o.com);
    sim->callback([&]() {
        resolve_seed(sim_o.com);
        auto model = sde::model_by_name(sim_o.model);
        std::vector<double> x0(static_cast<std::size_t>(model.dim), 0.0);
        if (!sim_o.x0.empty()) {
            x0 = parse_list(sim_o.x0);
            if (static_cast<int>(x0.size()) != model.dim)
                throw argument_error("x0 must have " + std::to_string(model.dim) +
                                     " coordinates");
        }
        json cfg{{"command", "simulate"}, {"model", sim_o.model},
                 {"step", sim_o.step},    {"n-steps", sim_o.n_steps},
                 {"replicate", sim_o.replicate}};
        finish_common(sim_o.com, cfg);
        echo_config(cfg);
        auto traj = sde::euler_maruyama(model, x0, sim_o.step, sim_o.n_steps,
                                        sim_o.com.seed, sim_o.replicate);
        std::string csv = io::csv_preamble(cfg);
        csv += "step";
        for (int a = 0; a < traj.dim; ++a) csv += ",x" + std::to_string(a);
        csv += "\n";
        for (std::size_t k = 0; k < traj.n_states(); ++k) {
            csv += std::to_string(k);
            for (double v : traj.state(k)) {
                csv += ",";
                csv += io::g17(v);
            }
            csv += "\n";
        }
        json j = io::envelope(
            cfg, json{{"states", traj.states}, {"dim", traj.dim}, {"step", traj.step}});
        emit(sim_o.com, cfg, csv, j);
        if (sim_o.com.out_path.empty())
            std::printf("simulated %zu states (final |x| = %.10g)\n", traj.n_states(),
                        norm2(traj.state(traj.n_steps())));
    });

    // ---------------- potential check ----------------
    auto* pot_cmd = app.add_subcommand("potential", "potential registry operations");
    pot_cmd->require_subcommand(1);
    auto* pot_check =
        pot_cmd->add_subcommand("check", "verify the inward-gradient condition");
    static struct {
        std::string potential = "heavy";
        int d = 1;
        double q = 0.5, scale = 1.0, strength = 1.0;
        std::string radii = "1,2,5,20,100";
        int directions = 32;
        CommonOpts com;
    } pc_o;
    pot_check->add_option("--potential", pc_o.potential)
        ->check(CLI::IsMember({"heavy", "gauss"}));
    pot_check->add_option("--d", pc_o.d)->check(CLI::PositiveNumber);
    pot_check->add_option("--q", pc_o.q);
    pot_check->add_option("--scale", pc_o.scale);
    pot_check->add_option("--strength", pc_o.strength);
    pot_check->add_option("--radii", pc_o.radii, "probe radii, comma separated");
    pot_check->add_option("--directions", pc_o.directions)->check(CLI::PositiveNumber);
    add_common(pot_check, pc_o.com);
    pot_check->callback([&]() {
        resolve_seed(pc_o.com);
        auto pot = ula::potential_by_name(pc_o.potential, pc_o.d, pc_o.q, pc_o.scale,
                                          pc_o.strength);
        json cfg{{"command", "potential check"}, {"potential", pc_o.potential},
                 {"d", pc_o.d},                  {"q", pc_o.q},
                 {"scale", pc_o.scale},          {"strength", pc_o.strength},
                 {"radii", pc_o.radii},          {"directions", pc_o.directions}};
        finish_common(pc_o.com, cfg);
        echo_config(cfg);
        auto radii = parse_list(pc_o.radii);
        auto rep = ula::check_potential(pot, radii, pc_o.directions, pc_o.com.seed);
        json data{{"inward_ok", rep.inward_ok},
                  {"worst_margin", rep.worst_margin},
                  {"fd_ok", rep.fd_ok},
                  {"worst_fd_error", rep.worst_fd_error}};
        json j = io::envelope(cfg, data);
        std::string csv = io::csv_preamble(cfg) +
                          "inward_ok,worst_margin,fd_ok,worst_fd_error\n" +
                          (rep.inward_ok ? "1" : "0") + "," + io::g17(rep.worst_margin) +
                          "," + (rep.fd_ok ? "1" : "0") + "," +
                          io::g17(rep.worst_fd_error) + "\n";
        emit(pc_o.com, cfg, csv, j);
        std::printf("inward_ok=%d worst_margin=%.10g fd_ok=%d\n", rep.inward_ok ? 1 : 0,
                    rep.worst_margin, rep.fd_ok ? 1 : 0);
    });

    // ---------------- bounds ----------------
    auto* b = app.add_subcommand("bounds", "closed-form exponents, constants and tunings");
    b->require_subcommand(1);

    static struct {
        double eta = 0, q = 0, q_prime = 0;
        CommonOpts com;
    } rate_o;
    auto* rate = b->add_subcommand("rate", "rate exponent");
    rate->add_option("--eta", rate_o.eta)->required();
    rate->add_option("--q", rate_o.q)->required();
    rate->add_option("--q-prime", rate_o.q_prime);
    add_common(rate, rate_o.com);
    rate->callback([&]() {
        json cfg{{"command", "bounds rate"},
                 {"eta", rate_o.eta},
                 {"q", rate_o.q},
                 {"q-prime", rate_o.q_prime}};
        finish_common(rate_o.com, cfg);
        echo_config(cfg);
        double v = bounds::rate_exponent(rate_o.eta, rate_o.q, rate_o.q_prime);
        emit(rate_o.com, cfg, io::csv_preamble(cfg) + "value\n" + io::g17(v) + "\n",
             io::envelope(cfg, json{{"value", v}}));
        print_value(v);
    });

    static struct {
        double q = 0, iota_dd = 1;
        CommonOpts com;
    } c_o;
    auto* csub = b->add_subcommand("c", "mixing-rate constant c(q, iota'')");
    csub->add_option("--q", c_o.q)->required();
    csub->add_option("--iota-dd", c_o.iota_dd);
    add_common(csub, c_o.com);
    csub->callback([&]() {
        json cfg{{"command", "bounds c"}, {"q", c_o.q}, {"iota-dd", c_o.iota_dd}};
        finish_common(c_o.com, cfg);
        echo_config(cfg);
        double v = bounds::cattiaux_c(c_o.q, c_o.iota_dd);
        emit(c_o.com, cfg, io::csv_preamble(cfg) + "value\n" + io::g17(v) + "\n",
             io::envelope(cfg, json{{"value", v}}));
        print_value(v);
    });

    static struct {
        double epsilon = 0, delta = 0, eta = 0, q = 0, q_prime = 0, L = 1;
        ConstOpts consts;
        CommonOpts com;
    } psic_o;
    auto* psic = b->add_subcommand("psi-cont", "continuous sample length Psi(eps, delta)");
    psic->add_option("--epsilon", psic_o.epsilon)->required();
    psic->add_option("--delta", psic_o.delta)->required();
    psic->add_option("--eta", psic_o.eta)->required();
    psic->add_option("--q", psic_o.q)->required();
    psic->add_option("--q-prime", psic_o.q_prime);
    psic->add_option("--L", psic_o.L);
    psic_o.consts.attach(psic);
    add_common(psic, psic_o.com);
    psic->callback([&]() {
        json cfg{{"command", "bounds psi-cont"}, {"epsilon", psic_o.epsilon},
                 {"delta", psic_o.delta},        {"eta", psic_o.eta},
                 {"q", psic_o.q},                {"q-prime", psic_o.q_prime},
                 {"L", psic_o.L}};
        psic_o.consts.echo(cfg);
        finish_common(psic_o.com, cfg);
        echo_config(cfg);
        double v = bounds::sample_length_continuous({psic_o.epsilon, psic_o.delta},
                                                    psic_o.eta, psic_o.q, psic_o.q_prime,
                                                    psic_o.L, psic_o.consts.build());
        emit(psic_o.com, cfg, io::csv_preamble(cfg) + "value\n" + io::g17(v) + "\n",
             io::envelope(cfg, json{{"value", v}}));
        print_value(v);
    });

    static struct {
        double epsilon = 0, delta = 0, delta_step = 0, eta1 = 0, q = 0, q_prime = 0,
               eta2 = 0, eta3 = 0;
        ConstOpts consts;
        CommonOpts com;
    } psid_o;
    auto* psid =
        b->add_subcommand("psi-disc", "discrete sample size Psi(Delta, eps, delta)");
    psid->add_option("--epsilon", psid_o.epsilon)->required();
    psid->add_option("--delta", psid_o.delta)->required();
    psid->add_option("--delta-step", psid_o.delta_step)->required();
    psid->add_option("--eta1", psid_o.eta1)->required();
    psid->add_option("--q", psid_o.q)->required();
    psid->add_option("--q-prime", psid_o.q_prime);
    psid->add_option("--eta2", psid_o.eta2);
    psid->add_option("--eta3", psid_o.eta3);
    psid_o.consts.attach(psid);
    add_common(psid, psid_o.com);
    psid->callback([&]() {
        json cfg{{"command", "bounds psi-disc"}, {"epsilon", psid_o.epsilon},
                 {"delta", psid_o.delta},        {"delta-step", psid_o.delta_step},
                 {"eta1", psid_o.eta1},          {"q", psid_o.q},
                 {"q-prime", psid_o.q_prime},    {"eta2", psid_o.eta2},
                 {"eta3", psid_o.eta3}};
        psid_o.consts.echo(cfg);
        finish_common(psid_o.com, cfg);
        echo_config(cfg);
        auto [v, choice] = bounds::sample_size_discrete(
            {psid_o.epsilon, psid_o.delta}, psid_o.delta_step, psid_o.eta1, psid_o.q,
            psid_o.q_prime, psid_o.eta2, psid_o.eta3, psid_o.consts.build());
        json data{{"value", v},
                  {"alpha", choice.alpha},
                  {"gamma_tilde", choice.gamma_tilde},
                  {"rho", choice.rho},
                  {"sigma_tilde", choice.sigma_tilde}};
        if (choice.r) data["r"] = *choice.r;
        emit(psid_o.com, cfg, io::csv_preamble(cfg) + "value\n" + io::g17(v) + "\n",
             io::envelope(cfg, data));
        print_value(v);
    });

    static struct {
        double n = 1, delta_step = 0, p = 2, eta1 = 0, q = 0, q_prime = 0, eta2 = 0,
               eta3 = 0;
        ConstOpts consts;
        CommonOpts com;
    } phi_o;
    auto* phi = b->add_subcommand("phi", "discrete moment bound Phi(n, Delta, p)");
    phi->add_option("--n", phi_o.n)->required();
    phi->add_option("--delta-step", phi_o.delta_step)->required();
    phi->add_option("--p", phi_o.p)->required();
    phi->add_option("--eta1", phi_o.eta1)->required();
    phi->add_option("--q", phi_o.q)->required();
    phi->add_option("--q-prime", phi_o.q_prime);
    phi->add_option("--eta2", phi_o.eta2);
    phi->add_option("--eta3", phi_o.eta3);
    phi_o.consts.attach(phi);
    add_common(phi, phi_o.com);
    phi->callback([&]() {
        json cfg{{"command", "bounds phi"},      {"n", phi_o.n},
                 {"delta-step", phi_o.delta_step}, {"p", phi_o.p},
                 {"eta1", phi_o.eta1},           {"q", phi_o.q},
                 {"q-prime", phi_o.q_prime},     {"eta2", phi_o.eta2},
                 {"eta3", phi_o.eta3}};
        phi_o.consts.echo(cfg);
        finish_common(phi_o.com, cfg);
        echo_config(cfg);
        auto choice = bounds::choose_discrete_exponents(phi_o.q, phi_o.q_prime,
                                                        phi_o.eta2, phi_o.eta3);
        double v = bounds::discrete_moment_bound(phi_o.n, phi_o.delta_step, phi_o.p,
                                                 phi_o.consts.build(), choice, phi_o.eta1,
                                                 phi_o.q, phi_o.q_prime);
        emit(phi_o.com, cfg, io::csv_preamble(cfg) + "value\n" + io::g17(v) + "\n",
             io::envelope(cfg, json{{"value", v}}));
        print_value(v);
    });

    static struct {
        double q = 0, eta = 0;
        CommonOpts com;
    } kap_o;
    auto* kap = b->add_subcommand("kappa", "restricted-eigenvalue exponent");
    kap->add_option("--q", kap_o.q)->required();
    kap->add_option("--eta", kap_o.eta)->required();
    add_common(kap, kap_o.com);
    kap->callback([&]() {
        json cfg{{"command", "bounds kappa"}, {"q", kap_o.q}, {"eta", kap_o.eta}};
        finish_common(kap_o.com, cfg);
        echo_config(cfg);
        double v = bounds::kappa(kap_o.q, kap_o.eta);
        emit(kap_o.com, cfg, io::csv_preamble(cfg) + "value\n" + io::g17(v) + "\n",
             io::envelope(cfg, json{{"value", v}}));
        print_value(v);
    });

    static struct {
        double eps0 = 0.1, c0 = 1, c = 1, q = 0, eta = 0, e_inf = 1;
        std::int64_t s = 1, d = 1;
        CommonOpts com;
    } t0_o;
    auto* t0c = b->add_subcommand("t0", "restricted-eigenvalue sample length T0");
    t0c->add_option("--eps0", t0_o.eps0)->required();
    t0c->add_option("--s", t0_o.s)->required();
    t0c->add_option("--c0", t0_o.c0);
    t0c->add_option("--c", t0_o.c);
    t0c->add_option("--q", t0_o.q)->required();
    t0c->add_option("--eta", t0_o.eta)->required();
    t0c->add_option("--d", t0_o.d)->required();
    t0c->add_option("--e-inf", t0_o.e_inf);
    add_common(t0c, t0_o.com);
    t0c->callback([&]() {
        json cfg{{"command", "bounds t0"}, {"eps0", t0_o.eps0}, {"s", t0_o.s},
                 {"c0", t0_o.c0},          {"c", t0_o.c},       {"q", t0_o.q},
                 {"eta", t0_o.eta},        {"d", t0_o.d},       {"e-inf", t0_o.e_inf}};
        finish_common(t0_o.com, cfg);
        echo_config(cfg);
        double v = bounds::lasso_T0(t0_o.eps0, t0_o.s, t0_o.c0, t0_o.c, t0_o.q, t0_o.eta,
                                    t0_o.d, t0_o.e_inf);
        emit(t0_o.com, cfg, io::csv_preamble(cfg) + "value\n" + io::g17(v) + "\n",
             io::envelope(cfg, json{{"value", v}}));
        print_value(v);
    });

    static struct {
        double T = 1, eps0 = 0.1, D_inf = 1, e_inf = 1;
        std::int64_t N = 1;
        CommonOpts com;
    } lm_o;
    auto* lmc = b->add_subcommand("lambda-min", "Lasso penalty threshold");
    lmc->add_option("--T", lm_o.T)->required();
    lmc->add_option("--N", lm_o.N)->required();
    lmc->add_option("--eps0", lm_o.eps0)->required();
    lmc->add_option("--D-inf", lm_o.D_inf);
    lmc->add_option("--e-inf", lm_o.e_inf);
    add_common(lmc, lm_o.com);
    lmc->callback([&]() {
        json cfg{{"command", "bounds lambda-min"}, {"T", lm_o.T},         {"N", lm_o.N},
                 {"eps0", lm_o.eps0},              {"D-inf", lm_o.D_inf},
                 {"e-inf", lm_o.e_inf}};
        finish_common(lm_o.com, cfg);
        echo_config(cfg);
        double v =
            bounds::lasso_lambda_min(lm_o.T, lm_o.N, lm_o.eps0, lm_o.D_inf, lm_o.e_inf);
        emit(lm_o.com, cfg, io::csv_preamble(cfg) + "value\n" + io::g17(v) + "\n",
             io::envelope(cfg, json{{"value", v}}));
        print_value(v);
    });

    static struct {
        double epsilon = 0, delta = 0, q = 0.5, eta1 = 0, eta2 = 0, eta3 = 0, L = 1,
               grad_sup = 1;
        std::int64_t d = 1;
        ConstOpts consts;
        CommonOpts com;
    } ut_o;
    auto* utc = b->add_subcommand("ula-tune", "ULA (Delta, n, m) tuning");
    utc->add_option("--epsilon", ut_o.epsilon)->required();
    utc->add_option("--delta", ut_o.delta)->required();
    utc->add_option("--q", ut_o.q)->required();
    utc->add_option("--eta1", ut_o.eta1)->required();
    utc->add_option("--eta2", ut_o.eta2);
    utc->add_option("--eta3", ut_o.eta3);
    utc->add_option("--d", ut_o.d);
    utc->add_option("--L", ut_o.L);
    utc->add_option("--grad-sup", ut_o.grad_sup);
    ut_o.consts.attach(utc);
    add_common(utc, ut_o.com);
    utc->callback([&]() {
        json cfg{{"command", "bounds ula-tune"}, {"epsilon", ut_o.epsilon},
                 {"delta", ut_o.delta},          {"q", ut_o.q},
                 {"eta1", ut_o.eta1},            {"eta2", ut_o.eta2},
                 {"eta3", ut_o.eta3},            {"d", ut_o.d},
                 {"L", ut_o.L},                  {"grad-sup", ut_o.grad_sup}};
        ut_o.consts.echo(cfg);
        finish_common(ut_o.com, cfg);
        echo_config(cfg);
        auto tun = bounds::ula_tuning({ut_o.epsilon, ut_o.delta}, ut_o.q, ut_o.eta1,
                                      ut_o.eta2, ut_o.eta3, ut_o.d, ut_o.L,
                                      ut_o.grad_sup, ut_o.consts.build());
        json data{{"delta_step", tun.delta_step},      {"n", tun.n},
                  {"m", tun.m},                        {"cap_regime", tun.cap_regime},
                  {"cap_exponent", tun.cap_exponent},  {"cap_pinsker", tun.cap_pinsker},
                  {"rho", tun.choice.rho},             {"sigma_tilde", tun.choice.sigma_tilde}};
        std::string csv = io::csv_preamble(cfg) + "delta_step,n,m\n" +
                          io::g17(tun.delta_step) + "," + io::g17(tun.n) + "," +
                          io::g17(tun.m) + "\n";
        emit(ut_o.com, cfg, csv, io::envelope(cfg, data));
        std::printf("delta_step=%.10g n=%.10g m=%.10g\n", tun.delta_step, tun.n, tun.m);
    });

    static struct {
        double n = 0, delta_step = 0, nu_vq = 1, q = 0.5, L = 1, grad_sup = 1;
        std::int64_t d = 1;
        ConstOpts consts;
        CommonOpts com;
    } tv_o;
    auto* tvc = b->add_subcommand("ula-tv", "ULA total-variation bound");
    tvc->add_option("--n", tv_o.n)->required();
    tvc->add_option("--delta-step", tv_o.delta_step)->required();
    tvc->add_option("--nu-vq", tv_o.nu_vq);
    tvc->add_option("--q", tv_o.q)->required();
    tvc->add_option("--d", tv_o.d);
    tvc->add_option("--L", tv_o.L);
    tvc->add_option("--grad-sup", tv_o.grad_sup);
    tv_o.consts.attach(tvc);
    add_common(tvc, tv_o.com);
    tvc->callback([&]() {
        json cfg{{"command", "bounds ula-tv"},      {"n", tv_o.n},
                 {"delta-step", tv_o.delta_step},   {"nu-vq", tv_o.nu_vq},
                 {"q", tv_o.q},                     {"d", tv_o.d},
                 {"L", tv_o.L},                     {"grad-sup", tv_o.grad_sup}};
        tv_o.consts.echo(cfg);
        finish_common(tv_o.com, cfg);
        echo_config(cfg);
        double v =
            bounds::ula_tv_bound(tv_o.n, tv_o.delta_step, tv_o.nu_vq, tv_o.q, tv_o.d,
                                 tv_o.L, tv_o.grad_sup, tv_o.consts.build());
        emit(tv_o.com, cfg, io::csv_preamble(cfg) + "value\n" + io::g17(v) + "\n",
             io::envelope(cfg, json{{"value", v}}));
        print_value(v);
    });

    static struct {
        double q = 0, iota = 1, v_exp = 1;
        CommonOpts com;
    } mu_o;
    auto* muc = b->add_subcommand("mu-const", "stationary moment constant c_{q+}");
    muc->add_option("--q", mu_o.q)->required();
    muc->add_option("--iota", mu_o.iota)->required();
    muc->add_option("--v-exp", mu_o.v_exp);
    add_common(muc, mu_o.com);
    muc->callback([&]() {
        json cfg{{"command", "bounds mu-const"},
                 {"q", mu_o.q},
                 {"iota", mu_o.iota},
                 {"v-exp", mu_o.v_exp}};
        finish_common(mu_o.com, cfg);
        echo_config(cfg);
        double v = bounds::mu_moment_constant(mu_o.q, mu_o.iota, mu_o.v_exp);
        emit(mu_o.com, cfg, io::csv_preamble(cfg) + "value\n" + io::g17(v) + "\n",
             io::envelope(cfg, json{{"value", v}}));
        print_value(v);
    });

    // ---------------- conc-lab ----------------
    auto* cl = app.add_subcommand("conc-lab", "empirical tails, calibration, coverage");
    cl->require_subcommand(1);

    struct TailsOpts {
        std::string model = "ou1d";
        std::string function = "x";
        double t = 100.0;
        std::int64_t replicates = 2000;
        std::string init = "auto";
        double t_burn = 0.0;
        std::string thresholds = "0.5,1,2,3,4";
        double step = sde::kDefaultStep;
        double centered_mean = std::numeric_limits<double>::quiet_NaN();
        CommonOpts com;

        void attach(CLI::App* cmd) {
            cmd->add_option("--model", model)
                ->check(CLI::IsMember(sde::registered_models()));
            cmd->add_option("--function", function)
                ->check(CLI::IsMember(functionals::registered_functions()));
            cmd->add_option("--t", t)->check(CLI::PositiveNumber);
            cmd->add_option("--replicates", replicates)->check(CLI::PositiveNumber);
            cmd->add_option("--init", init)
                ->check(CLI::IsMember({"auto", "exact", "burnin"}));
            cmd->add_option("--t-burn", t_burn);
            cmd->add_option("--thresholds", thresholds);
            cmd->add_option("--step", step)->check(CLI::PositiveNumber);
            cmd->add_option("--centered-mean", centered_mean,
                            "known mu(f); omit for plug-in centering");
        }
        conclab::StationaryInit init_method() const {
            if (init == "exact") return conclab::StationaryInit::exact();
            if (init == "burnin") return conclab::StationaryInit::burnin(t_burn);
            return conclab::StationaryInit::auto_pick();
        }
        json config(const char* command) const {
            return json{{"command", command},
                        {"model", model},
                        {"function", function},
                        {"t", t},
                        {"replicates", replicates},
                        {"init", init},
                        {"t-burn", t_burn},
                        {"thresholds", thresholds},
                        {"step", step}};
        }
        conclab::TailTable run() const {
            auto m = sde::model_by_name(model);
            auto f = functionals::function_by_name(function);
            if (!std::isnan(centered_mean)) f.centered_mean = centered_mean;
            return conclab::run_tail_experiment(m, f, t, replicates, init_method(),
                                                com.seed, parse_list(thresholds), step,
                                                com.threads);
        }
    };

    auto* tails = cl->add_subcommand("tails", "empirical tail table of |G_t(f)|");
    static TailsOpts tails_o;
    tails_o.attach(tails);
    add_common(tails, tails_o.com);
    tails->callback([&]() {
        resolve_seed(tails_o.com);
        json cfg = tails_o.config("conc-lab tails");
        finish_common(tails_o.com, cfg);
        echo_config(cfg);
        auto table = tails_o.run();
        emit(tails_o.com, cfg, conclab::tail_table_csv(table, cfg),
             conclab::tail_table_json(table, cfg));
        std::printf("replicates=%lld max|G|=%.10g\n",
                    static_cast<long long>(table.replicates),
                    table.values.empty() ? 0.0 : table.values.back());
    });

    auto* calib = cl->add_subcommand("calibrate", "calibrate the W constant from tails");
    static TailsOpts calib_o;
    calib_o.attach(calib);
    static std::string ugrid_s = "2,2.5,3";
    calib->add_option("--u-grid", ugrid_s);
    add_common(calib, calib_o.com);
    calib->callback([&]() {
        resolve_seed(calib_o.com);
        json cfg = calib_o.config("conc-lab calibrate");
        cfg["u-grid"] = ugrid_s;
        finish_common(calib_o.com, cfg);
        echo_config(cfg);
        auto m = sde::model_by_name(calib_o.model);
        auto f = functionals::function_by_name(calib_o.function);
        auto table = calib_o.run();
        double st = bounds::rate_exponent(f.eta1, m.erg.q, m.erg.q_prime);
        auto ugrid = parse_list(ugrid_s);
        double w = conclab::calibrate_W(table, f.L, st, ugrid);
        json data{{"W_hat", w}, {"sigma_tilde", st}, {"replicates", table.replicates}};
        std::string csv = io::csv_preamble(cfg) + "W_hat,sigma_tilde\n" + io::g17(w) +
                          "," + io::g17(st) + "\n";
        emit(calib_o.com, cfg, csv, io::envelope(cfg, data));
        print_value(w);
    });

    auto* mom = cl->add_subcommand("moments", "empirical L^p norms of |G_t(f)|");
    static TailsOpts mom_o;
    mom_o.attach(mom);
    static std::string plist_s = "2,4";
    mom->add_option("--p-list", plist_s);
    add_common(mom, mom_o.com);
    mom->callback([&]() {
        resolve_seed(mom_o.com);
        json cfg = mom_o.config("conc-lab moments");
        cfg["p-list"] = plist_s;
        finish_common(mom_o.com, cfg);
        echo_config(cfg);
        auto table = mom_o.run();
        auto ps = parse_int_list(plist_s);
        auto moments = conclab::empirical_moments(table.values, ps);
        std::string csv = io::csv_preamble(cfg) + "p,lp_norm\n";
        json data = json::array();
        for (auto [p, norm] : moments) {
            csv += std::to_string(p) + "," + io::g17(norm) + "\n";
            data.push_back(json{{"p", p}, {"lp_norm", norm}});
            std::printf("p=%d L^p=%.10g\n", p, norm);
        }
        emit(mom_o.com, cfg, csv, io::envelope(cfg, data));
    });

    auto* cov = cl->add_subcommand("coverage", "PAC coverage of the burn-in average");
    static struct {
        std::string model = "ou1d";
        std::string function = "x2";
        double burnin = 10.0, t = 500.0, epsilon = 0.05, delta = 0.05, target = 1.0,
               step = sde::kDefaultStep;
        std::int64_t runs = 100;
        CommonOpts com;
    } cov_o;
    cov->add_option("--model", cov_o.model)
        ->check(CLI::IsMember(sde::registered_models()));
    cov->add_option("--function", cov_o.function)
        ->check(CLI::IsMember(functionals::registered_functions()));
    cov->add_option("--burnin", cov_o.burnin);
    cov->add_option("--t", cov_o.t)->check(CLI::PositiveNumber);
    cov->add_option("--epsilon", cov_o.epsilon)->required();
    cov->add_option("--delta", cov_o.delta)->required();
    cov->add_option("--target", cov_o.target)->required();
    cov->add_option("--runs", cov_o.runs);
    cov->add_option("--step", cov_o.step)->check(CLI::PositiveNumber);
    add_common(cov, cov_o.com);
    cov->callback([&]() {
        resolve_seed(cov_o.com);
        json cfg{{"command", "conc-lab coverage"}, {"model", cov_o.model},
                 {"function", cov_o.function},     {"burnin", cov_o.burnin},
                 {"t", cov_o.t},                   {"epsilon", cov_o.epsilon},
                 {"delta", cov_o.delta},           {"target", cov_o.target},
                 {"runs", cov_o.runs},             {"step", cov_o.step}};
        finish_common(cov_o.com, cfg);
        echo_config(cfg);
        auto model = sde::model_by_name(cov_o.model);
        auto f = functionals::function_by_name(cov_o.function);
        auto n_burn = static_cast<std::int64_t>(std::llround(cov_o.burnin / cov_o.step));
        auto n_avg = static_cast<std::int64_t>(std::llround(cov_o.t / cov_o.step));
        auto estimator = [&](std::uint64_t seed, std::int64_t run) {
            auto x0 = model.has_exact_sampler()
                          ? sde::sample_stationary(model, sde::StationaryMethod::exact(),
                                                   seed, run)
                          : std::vector<double>(static_cast<std::size_t>(model.dim), 0.0);
            if (model.dim == 1 && model.linear1d && f.poly) {
                std::span<const double> x0s{x0.data(), 1};
                auto res = engine::run_linear1d(*model.linear1d, x0s, cov_o.step, n_burn,
                                                n_avg, *f.poly, seed, run, 1);
                return res.sums[0] / static_cast<double>(n_avg);
            }
            auto res = engine::run_model_stream(
                model, x0, cov_o.step, n_burn, n_avg,
                [&](std::span<const double> y) { return f.eval(y); }, seed, run);
            return res.sum / static_cast<double>(n_avg);
        };
        auto rep = conclab::pac_coverage(estimator, cov_o.target,
                                         {cov_o.epsilon, cov_o.delta}, cov_o.runs,
                                         cov_o.com.seed);
        emit(cov_o.com, cfg, conclab::coverage_csv(rep, cfg),
             conclab::coverage_json(rep, cfg));
        std::printf("within=%lld/%lld pass=%d\n", static_cast<long long>(rep.within_eps),
                    static_cast<long long>(rep.runs), rep.pass ? 1 : 0);
    });

    // ---------------- lasso ----------------
    auto* ls = app.add_subcommand("lasso", "penalized drift estimation experiments");
    ls->require_subcommand(1);

    struct LassoSimOpts {
        int d = 1;
        std::string blocks = "-1:1";
        std::string theta0 = "0:-1";
        double sigma0 = std::numeric_limits<double>::quiet_NaN();  // default sqrt(2)
        double T = 100.0;
        double step = sde::kDefaultStep;
        CommonOpts com;

        void attach(CLI::App* cmd) {
            cmd->add_option("--d", d)->check(CLI::PositiveNumber);
            cmd->add_option("--blocks", blocks, "qtilde:alphatilde[;...]");
            cmd->add_option("--theta0", theta0, "sparse idx:value list");
            cmd->add_option("--sigma0", sigma0, "constant diffusion (default sqrt(2))");
            cmd->add_option("--T", T)->check(CLI::PositiveNumber);
            cmd->add_option("--step", step)->check(CLI::PositiveNumber);
        }
        json config(const char* command) const {
            return json{{"command", command}, {"d", d},   {"blocks", blocks},
                        {"theta0", theta0},   {"T", T},   {"step", step},
                        {"sigma0", std::isnan(sigma0) ? std::sqrt(2.0) : sigma0}};
        }
        struct Sim {
            lasso::Dictionary dict;
            std::vector<double> theta0_vec;
            lasso::GramSystem sys;
        };
        Sim run() const {
            double sig = std::isnan(sigma0) ? std::sqrt(2.0) : sigma0;
            auto dict = lasso::build_dictionary(d, parse_blocks(blocks));
            auto th0 = parse_sparse(theta0, dict.N);
            sde::DiffusionModel model;
            model.dim = d;
            model.name = "dict-drift";
            model.drift = lasso::drift_from_dictionary(dict, th0);
            model.diffusion = [sig, dd = d](std::span<const double>,
                                            std::span<double> out) {
                for (int i = 0; i < dd; ++i)
                    for (int j = 0; j < dd; ++j)
                        out[static_cast<std::size_t>(i) * dd + j] = (i == j) ? sig : 0.0;
            };
            model.erg.q = -1.0;
            model.erg.r = 0.5;
            auto n = static_cast<std::int64_t>(std::llround(T / step));
            std::vector<double> x0(static_cast<std::size_t>(d), 0.0);
            auto traj = sde::euler_maruyama(model, x0, step, n, com.seed, 0);
            auto sys = lasso::gram_and_target(traj, dict, lasso::constant_sigma(d, sig));
            return {std::move(dict), std::move(th0), std::move(sys)};
        }
    };

    auto* fit = ls->add_subcommand("fit", "simulate, assemble the Gram system, solve");
    static LassoSimOpts fit_o;
    fit_o.attach(fit);
    static double fit_lambda = 0.1;
    static double fit_tol = 1e-8;
    static std::int64_t fit_sweeps = 100000;
    fit->add_option("--lambda", fit_lambda)->required();
    fit->add_option("--tol", fit_tol);
    fit->add_option("--max-sweeps", fit_sweeps);
    add_common(fit, fit_o.com);
    fit->callback([&]() {
        resolve_seed(fit_o.com);
        json cfg = fit_o.config("lasso fit");
        cfg["lambda"] = fit_lambda;
        cfg["tol"] = fit_tol;
        cfg["max-sweeps"] = fit_sweeps;
        finish_common(fit_o.com, cfg);
        echo_config(cfg);
        auto sim_res = fit_o.run();
        auto result = lasso::lasso_solve(sim_res.sys, fit_lambda, fit_tol, fit_sweeps);
        emit(fit_o.com, cfg, lasso::fit_csv(result, cfg), lasso::fit_json(result, cfg));
        std::printf("kkt=%.3g sweeps=%lld nonzeros=%d\n", result.kkt_residual,
                    static_cast<long long>(result.sweeps),
                    static_cast<int>(std::count_if(
                        result.theta.begin(), result.theta.end(),
                        [](double v) { return v != 0.0; })));
    });

    auto* probe = ls->add_subcommand("probe-re", "restricted-eigenvalue cone probing");
    static LassoSimOpts probe_o;
    probe_o.attach(probe);
    static int probe_s = 1;
    static double probe_c0 = 1.0;
    static std::int64_t probe_n = 1000;
    probe->add_option("--s", probe_s)->check(CLI::PositiveNumber);
    probe->add_option("--c0", probe_c0);
    probe->add_option("--n-probe", probe_n);
    add_common(probe, probe_o.com);
    probe->callback([&]() {
        resolve_seed(probe_o.com);
        json cfg = probe_o.config("lasso probe-re");
        cfg["s"] = probe_s;
        cfg["c0"] = probe_c0;
        cfg["n-probe"] = probe_n;
        finish_common(probe_o.com, cfg);
        echo_config(cfg);
        auto sim_res = probe_o.run();
        auto re = lasso::restricted_eigenvalue_probe(sim_res.sys, probe_s, probe_c0,
                                                     probe_n, probe_o.com.seed);
        json data{{"min_quotient", re.min_quotient}, {"argmin", re.argmin}};
        std::string csv =
            io::csv_preamble(cfg) + "min_quotient\n" + io::g17(re.min_quotient) + "\n";
        emit(probe_o.com, cfg, csv, io::envelope(cfg, data));
        print_value(re.min_quotient);
    });

    auto* orc =
        ls->add_subcommand("oracle", "fit with the threshold lambda, check the bound");
    static LassoSimOpts orc_o;
    orc_o.attach(orc);
    static std::int64_t orc_s0 = 1;
    static double orc_eps0 = 0.1;
    static double orc_lambda = std::numeric_limits<double>::quiet_NaN();
    orc->add_option("--s0", orc_s0)->check(CLI::PositiveNumber);
    orc->add_option("--eps0", orc_eps0);
    orc->add_option("--lambda", orc_lambda, "override the threshold lambda");
    add_common(orc, orc_o.com);
    orc->callback([&]() {
        resolve_seed(orc_o.com);
        json cfg = orc_o.config("lasso oracle");
        cfg["s0"] = orc_s0;
        cfg["eps0"] = orc_eps0;
        finish_common(orc_o.com, cfg);
        echo_config(cfg);
        auto sim_res = orc_o.run();
        double e_inf = lasso::lambda_min_sym(sim_res.sys);
        double d_inf = lasso::max_diagonal(sim_res.sys);
        double lam = std::isnan(orc_lambda)
                         ? bounds::lasso_lambda_min(sim_res.sys.T, sim_res.sys.N,
                                                    orc_eps0, d_inf, e_inf)
                         : orc_lambda;
        cfg["lambda"] = lam;
        auto result = lasso::lasso_solve(sim_res.sys, lam);
        auto oc =
            lasso::oracle_check(result, sim_res.theta0_vec, sim_res.sys, orc_s0, e_inf);
        json data{{"lambda", lam},     {"lhs", oc.lhs},
                  {"rhs", oc.rhs},     {"holds", oc.holds},
                  {"e_inf_hat", e_inf}, {"D_inf_hat", d_inf},
                  {"theta_hat", result.theta}};
        std::string csv = io::csv_preamble(cfg) + "lambda,lhs,rhs,holds\n" +
                          io::g17(lam) + "," + io::g17(oc.lhs) + "," + io::g17(oc.rhs) +
                          "," + (oc.holds ? "1" : "0") + "\n";
        emit(orc_o.com, cfg, csv, io::envelope(cfg, data));
        std::printf("lambda=%.10g lhs=%.10g rhs=%.10g holds=%d\n", lam, oc.lhs, oc.rhs,
                    oc.holds ? 1 : 0);
    });

    // ---------------- ula ----------------
    auto* ul = app.add_subcommand("ula", "unadjusted Langevin sampler experiments");
    ul->require_subcommand(1);

    struct UlaPotOpts {
        std::string potential = "heavy";
        int d = 1;
        double q = 0.5, scale = 1.0, strength = 1.0;

        void attach(CLI::App* cmd) {
            cmd->add_option("--potential", potential)
                ->check(CLI::IsMember({"heavy", "gauss"}));
            cmd->add_option("--d", d)->check(CLI::PositiveNumber);
            cmd->add_option("--q", q);
            cmd->add_option("--scale", scale);
            cmd->add_option("--strength", strength);
        }
        ula::Potential build() const {
            return ula::potential_by_name(potential, d, q, scale, strength);
        }
        void echo(json& cfg) const {
            cfg["potential"] = potential;
            cfg["d"] = d;
            cfg["q"] = q;
            cfg["scale"] = scale;
            cfg["strength"] = strength;
        }
    };

    auto* urun = ul->add_subcommand("run", "one ULA chain, exported as CSV");
    static UlaPotOpts urun_pot;
    urun_pot.attach(urun);
    static double urun_step = 0.01;
    static std::int64_t urun_n = 10000;
    static std::string urun_x0;
    static std::int64_t urun_rep = 0;
    urun->add_option("--delta-step", urun_step)->check(CLI::PositiveNumber);
    urun->add_option("--n-steps", urun_n)->check(CLI::PositiveNumber);
    urun->add_option("--x0", urun_x0);
    urun->add_option("--replicate", urun_rep);
    static CommonOpts urun_com;
    add_common(urun, urun_com);
    urun->callback([&]() {
        resolve_seed(urun_com);
        auto pot = urun_pot.build();
        std::vector<double> x0(static_cast<std::size_t>(pot.dim), 0.0);
        if (!urun_x0.empty()) {
            x0 = parse_list(urun_x0);
            if (static_cast<int>(x0.size()) != pot.dim)
                throw argument_error("x0 must have " + std::to_string(pot.dim) +
                                     " coordinates");
        }
        json cfg{{"command", "ula run"},
                 {"delta-step", urun_step},
                 {"n-steps", urun_n},
                 {"replicate", urun_rep}};
        urun_pot.echo(cfg);
        finish_common(urun_com, cfg);
        echo_config(cfg);
        auto chain = ula::ula_chain(pot, urun_step, urun_n, x0, urun_com.seed, urun_rep);
        json j = io::envelope(cfg, json{{"states", chain.states}, {"dim", chain.dim}});
        emit(urun_com, cfg, ula::chain_csv(chain, cfg), j);
        if (urun_com.out_path.empty())
            std::printf("chain of %zu states\n", chain.n_states());
    });

    auto* uest = ul->add_subcommand("estimate", "burn-in Monte Carlo estimator");
    static UlaPotOpts uest_pot;
    uest_pot.attach(uest);
    static double uest_step = 0.01;
    static std::int64_t uest_m = 1000, uest_n = 100000, uest_rep = 0;
    static std::string uest_fn = "x2";
    uest->add_option("--delta-step", uest_step)->check(CLI::PositiveNumber);
    uest->add_option("--m", uest_m);
    uest->add_option("--n", uest_n);
    uest->add_option("--replicate", uest_rep);
    uest->add_option("--function", uest_fn)
        ->check(CLI::IsMember(functionals::registered_functions()));
    static CommonOpts uest_com;
    add_common(uest, uest_com);
    uest->callback([&]() {
        resolve_seed(uest_com);
        auto pot = uest_pot.build();
        json cfg{{"command", "ula estimate"}, {"delta-step", uest_step}, {"m", uest_m},
                 {"n", uest_n},               {"function", uest_fn},
                 {"replicate", uest_rep}};
        uest_pot.echo(cfg);
        finish_common(uest_com, cfg);
        echo_config(cfg);
        auto f = functionals::function_by_name(uest_fn);
        std::vector<double> x0(static_cast<std::size_t>(pot.dim), 0.0);
        auto chain = ula::ula_chain(pot, uest_step, uest_m + uest_n, x0, uest_com.seed,
                                    uest_rep);
        double v = ula::ula_estimator(chain, uest_m, uest_n, f);
        emit(uest_com, cfg, io::csv_preamble(cfg) + "estimate\n" + io::g17(v) + "\n",
             io::envelope(cfg, json{{"estimate", v}}));
        print_value(v);
    });

    auto* upac = ul->add_subcommand("pac", "tuned PAC coverage experiment");
    static UlaPotOpts upac_pot;
    upac_pot.attach(upac);
    static double upac_eps = 0.1, upac_delta = 0.05, upac_budget = 2e9;
    static std::int64_t upac_runs = 100;
    static std::string upac_fn = "x2";
    static double ov_step = 0.0;
    static std::int64_t ov_n = 0, ov_m = 0;
    static ConstOpts upac_consts;
    upac->add_option("--function", upac_fn)
        ->check(CLI::IsMember(functionals::registered_functions()));
    upac->add_option("--epsilon", upac_eps)->required();
    upac->add_option("--delta", upac_delta)->required();
    upac->add_option("--runs", upac_runs);
    upac->add_option("--budget", upac_budget, "simulation step budget");
    upac->add_option("--override-delta-step", ov_step,
                     "exploratory step size replacing the tuned one");
    upac->add_option("--override-n", ov_n);
    upac->add_option("--override-m", ov_m);
    upac_consts.attach(upac);
    static CommonOpts upac_com;
    add_common(upac, upac_com);
    upac->callback([&]() {
        resolve_seed(upac_com);
        auto pot = upac_pot.build();
        json cfg{{"command", "ula pac"}, {"function", upac_fn}, {"epsilon", upac_eps},
                 {"delta", upac_delta},  {"runs", upac_runs},   {"budget", upac_budget}};
        upac_pot.echo(cfg);
        upac_consts.echo(cfg);
        finish_common(upac_com, cfg);
        echo_config(cfg);
        auto f = functionals::function_by_name(upac_fn);
        auto consts = upac_consts.build();
        // unless set explicitly, derive iota'' from the potential (iota'/2)
        if (consts.iota_dd.value == 1.0)
            consts.iota_dd.value = 0.5 * sde::iota_prime(pot.langevin_ergodicity());
        std::optional<ula::UlaPacOverride> ov;
        if (ov_step > 0.0) {
            ov = ula::UlaPacOverride{ov_step, ov_n, ov_m};
            cfg["override-delta-step"] = ov_step;
            cfg["override-n"] = ov_n;
            cfg["override-m"] = ov_m;
        }
        auto res = ula::ula_pac_experiment(pot, f, {upac_eps, upac_delta}, consts,
                                           upac_runs, upac_com.seed, ov, upac_budget,
                                           upac_com.threads);
        json data{{"target", res.target},
                  {"exploratory", res.exploratory},
                  {"tuned_delta_step", res.tuning.delta_step},
                  {"tuned_n", res.tuning.n},
                  {"tuned_m", res.tuning.m},
                  {"within", res.coverage.within_eps},
                  {"runs", res.coverage.runs},
                  {"pass", res.coverage.pass},
                  {"estimates", res.coverage.estimates}};
        emit(upac_com, cfg, conclab::coverage_csv(res.coverage, cfg),
             io::envelope(cfg, data));
        std::printf("target=%.10g within=%lld/%lld pass=%d%s\n", res.target,
                    static_cast<long long>(res.coverage.within_eps),
                    static_cast<long long>(res.coverage.runs), res.coverage.pass ? 1 : 0,
                    res.exploratory ? " (exploratory sizes)" : "");
    });

    // ---------------- parse & dispatch ----------------
    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        args = merge_config(args);
        std::vector<const char*> cargs;
        cargs.push_back(argv[0]);
        for (const auto& a : args) cargs.push_back(a.c_str());
        app.parse(static_cast<int>(cargs.size()), cargs.data());
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    } catch (const regime_error& e) {
        std::cerr << "regime error: " << e.what() << "\n";
        return 1;
    } catch (const calibration_error& e) {
        std::cerr << "calibration error: " << e.what() << "\n";
        return 1;
    } catch (const numerical_error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 1;
    } catch (const argument_error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const unsupported_error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
