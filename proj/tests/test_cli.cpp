#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

const char* cli = ERGOLAB_CLI_PATH;

struct RunResult {
    int code = 0;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunResult run(const std::string& args, const std::string& env = "") {
    static int counter = 0;
    fs::path dir = fs::temp_directory_path() / "ergolab_cli_test";
    fs::create_directories(dir);
    fs::path out = dir / ("out" + std::to_string(counter) + ".txt");
    fs::path err = dir / ("err" + std::to_string(counter) + ".txt");
    ++counter;
    std::string cmd = env + " " + std::string(cli) + " " + args + " >" + out.string() +
                      " 2>" + err.string();
    int rc = std::system(cmd.c_str());
    RunResult r;
    r.code = WEXITSTATUS(rc);
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

fs::path tmpfile(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "ergolab_cli_test";
    fs::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST_CASE("bounds kappa prints a plain ten-digit decimal") {
    auto r = run("bounds kappa --q 0 --eta 0");
    CHECK(r.code == 0);
    CHECK(r.out == "0.6666666667\n");
}

TEST_CASE("exit codes: usage = 2, regime = 1, success = 0") {
    CHECK(run("bounds kappa --q 0 --eta 0").code == 0);
    CHECK(run("bounds kappa --q 5 --eta 0").code == 2);          // domain violation
    CHECK(run("bounds kappa --q 0 --eta 0 --bogus 1").code == 2);  // unknown key
    CHECK(run("bounds nope").code == 2);
    // delta >= e^-2 in the polynomial branch is a regime error
    CHECK(run("bounds psi-cont --epsilon 0.1 --delta 0.2 --eta 1 --q 0 --q-prime 1")
              .code == 1);
    // infeasible tuned ULA sizes against the budget
    CHECK(run("ula pac --q 0.5 --epsilon 0.1 --delta 0.05 --runs 100 --budget 1e6")
              .code == 1);
}

TEST_CASE("ERGODIC_LAB_SEED is the seed fallback") {
    auto a = run("simulate --model ou1d --n-steps 100", "ERGODIC_LAB_SEED=42");
    auto b = run("simulate --model ou1d --n-steps 100 --seed 42");
    auto c = run("simulate --model ou1d --n-steps 100 --seed 43");
    CHECK(a.out == b.out);
    CHECK(a.out != c.out);
}

TEST_CASE("fixed seed reruns emit byte-identical CSV") {
    auto p1 = tmpfile("tails1.csv");
    auto p2 = tmpfile("tails2.csv");
    std::string base =
        "conc-lab tails --model ou1d --function x --centered-mean 0 --t 5 "
        "--replicates 100 --thresholds 0.5,1,2 --seed 7 --step 0.01 --out ";
    CHECK(run(base + p1.string()).code == 0);
    CHECK(run(base + p2.string()).code == 0);
    auto s1 = slurp(p1), s2 = slurp(p2);
    CHECK(!s1.empty());
    CHECK(s1 == s2);  // the destination path is not part of the payload
    CHECK(s1.find("# version: ergodic-lab") != std::string::npos);
    CHECK(s1.find("# config: ") != std::string::npos);

    auto u1 = tmpfile("ula1.csv");
    auto u2 = tmpfile("ula2.csv");
    std::string ubase =
        "ula run --q 0.5 --delta-step 0.01 --n-steps 500 --seed 3 --out ";
    CHECK(run(ubase + u1.string()).code == 0);
    CHECK(run(ubase + u2.string()).code == 0);
    CHECK(slurp(u1) == slurp(u2));
}

TEST_CASE("json format emits an envelope with config echo") {
    auto p = tmpfile("kappa.json");
    auto r = run("bounds kappa --q 0.5 --eta 1 --format json --out " + p.string());
    CHECK(r.code == 0);
    auto j = nlohmann::json::parse(slurp(p));
    CHECK(j["config"]["command"] == "bounds kappa");
    CHECK(j["config"]["q"] == 0.5);
    CHECK(j["data"]["value"].get<double>() == doctest::Approx(1.0 / 9.5));
    CHECK(j["version"].get<std::string>().find("ergodic-lab") == 0);
}

TEST_CASE("config file supplies defaults, flags override, unknown keys fail") {
    auto cfgp = tmpfile("cfg.json");
    {
        std::ofstream out(cfgp);
        out << R"({"q": 0, "eta": 0})";
    }
    auto r = run("bounds kappa --config " + cfgp.string());
    CHECK(r.code == 0);
    CHECK(r.out == "0.6666666667\n");
    // explicit flag wins over the config value
    auto r2 = run("bounds kappa --config " + cfgp.string() + " --q -1");
    CHECK(r2.code == 0);
    CHECK(r2.out == "2\n");
    // unknown key is rejected by name
    auto badp = tmpfile("bad.json");
    {
        std::ofstream out(badp);
        out << R"({"q": 0, "eta": 0, "misspelled": 1})";
    }
    auto r3 = run("bounds kappa --config " + badp.string());
    CHECK(r3.code == 2);
    CHECK(r3.err.find("misspelled") != std::string::npos);
}

TEST_CASE("config round-trip: parse -> echo -> parse is stable") {
    auto r1 = run("bounds psi-cont --epsilon 0.1 --delta 0.01 --eta 1 --q 0 --q-prime 1");
    CHECK(r1.code == 0);
    auto pos = r1.err.find("config: ");
    REQUIRE(pos != std::string::npos);
    auto line_end = r1.err.find('\n', pos);
    auto echoed = r1.err.substr(pos + 8, line_end - pos - 8);
    auto cfgp = tmpfile("echo.json");
    {
        std::ofstream out(cfgp);
        out << echoed;
    }
    auto r2 = run("bounds psi-cont --config " + cfgp.string());
    CHECK(r2.code == 0);
    CHECK(r2.out == r1.out);
    auto pos2 = r2.err.find("config: ");
    REQUIRE(pos2 != std::string::npos);
    auto echoed2 = r2.err.substr(pos2 + 8, r2.err.find('\n', pos2) - pos2 - 8);
    CHECK(nlohmann::json::parse(echoed) == nlohmann::json::parse(echoed2));
}

TEST_CASE("no partial output is left behind on failure") {
    auto p = tmpfile("never.csv");
    fs::remove(p);
    // regime error fires before any write
    auto r = run("bounds psi-cont --epsilon 0.1 --delta 0.2 --eta 1 --q 0 --out " +
                 p.string());
    CHECK(r.code == 1);
    CHECK(!fs::exists(p));
}

TEST_CASE("lasso oracle pipeline runs end to end") {
    auto r = run("lasso oracle --d 1 --blocks -1:1 --theta0 0:-1 --T 50 --step 0.001 "
                 "--s0 1 --eps0 0.1 --seed 5");
    CHECK(r.code == 0);
    CHECK(r.out.find("holds=1") != std::string::npos);
}
