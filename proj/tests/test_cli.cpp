#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

std::string bin() {
    const char* p = std::getenv("EPDUCT_BIN");
    REQUIRE_MESSAGE(p != nullptr, "EPDUCT_BIN must point at the CLI binary");
    return p;
}

int run(const std::string& args) {
    const std::string cmd = bin() + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), "missing file: " << p.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

struct TmpDir {
    fs::path path;
    TmpDir() : path(fs::temp_directory_path() / ("epduct_cli_" + std::to_string(::getpid()) +
                                                 "_" + std::to_string(counter()))) {
        fs::create_directories(path);
    }
    ~TmpDir() { fs::remove_all(path); }
    static int counter() {
        static int c = 0;
        return c++;
    }
};

void write_config(const fs::path& p, const std::string& extra = {}) {
    std::ofstream out(p);
    out << "gas.gamma = 1.0\n"
           "gas.j0 = 0.1\n"
           "background.b0 = 0.05\n"
           "background.u0 = 2.0\n"
           "background.e0 = 0.0\n"
           "background.length = 2.0\n"
           "duct.length = 0.5\n"
           "duct.n1 = 31\n"
           "duct.n2 = 9\n"
           "duct.n3 = 9\n"
           "solver.m_max = 2\n"
           "data.sigma_target = 1e-5\n"
        << extra;
}

}  // namespace

TEST_CASE("background command writes the profile and summary") {
    TmpDir tmp;
    write_config(tmp.path / "run.cfg");
    const int rc = run("--config " + (tmp.path / "run.cfg").string() + " --out " +
                       (tmp.path / "out").string() + " background");
    CHECK(rc == 0);
    const std::string csv = slurp(tmp.path / "out" / "background.csv");
    CHECK(csv.rfind("x1,u,E,rho,phi0,Phi0\n", 0) == 0);
    const auto j = nlohmann::json::parse(slurp(tmp.path / "out" / "background.json"));
    CHECK(j["L1"].get<double>() == doctest::Approx(2.0));
    CHECK(j["orbit_class"] == "periodic");
}

TEST_CASE("solve command is deterministic") {
    TmpDir tmp;
    write_config(tmp.path / "run.cfg");
    for (const char* sub : {"a", "b"}) {
        const int rc = run("--config " + (tmp.path / "run.cfg").string() + " --out " +
                           (tmp.path / sub).string() + " solve");
        REQUIRE(rc == 0);
    }
    CHECK(slurp(tmp.path / "a" / "psi.csv") == slurp(tmp.path / "b" / "psi.csv"));
    CHECK(slurp(tmp.path / "a" / "Psi.csv") == slurp(tmp.path / "b" / "Psi.csv"));
    auto ja = nlohmann::json::parse(slurp(tmp.path / "a" / "manifest.json"));
    auto jb = nlohmann::json::parse(slurp(tmp.path / "b" / "manifest.json"));
    ja.erase("timing_sec");
    jb.erase("timing_sec");
    CHECK(ja == jb);
    // iteration log is machine-readable JSON lines
    std::istringstream lines(slurp(tmp.path / "a" / "iterations.jsonl"));
    std::string line;
    int n = 0;
    while (std::getline(lines, line)) {
        const auto j = nlohmann::json::parse(line);
        CHECK(j.contains("step_diff"));
        CHECK(j.contains("regime_margin"));
        ++n;
    }
    CHECK(n >= 1);
}

TEST_CASE("truncation exit code") {
    TmpDir tmp;
    write_config(tmp.path / "run.cfg",
                 "background.u0 = 1.2\nbackground.e0 = -0.5\nbackground.length = 5.0\n");
    const int rc = run("--config " + (tmp.path / "run.cfg").string() + " --out " +
                       (tmp.path / "out").string() + " background");
    CHECK(rc == 3);
    // the solver refuses a duct longer than the detected L1 with the same code
    const int rc2 = run("--config " + (tmp.path / "run.cfg").string() + " --out " +
                        (tmp.path / "out2").string() + " --L 3.0 solve");
    CHECK(rc2 == 3);
}

TEST_CASE("infeasible-weight exit code directs to the weight command") {
    TmpDir tmp;
    // unscaled background: strong coupling, L1* < 0.5
    write_config(tmp.path / "run.cfg",
                 "gas.j0 = 1.0\nbackground.b0 = 0.5\nbackground.e0 = 0.1\n");
    const int rc = run("--config " + (tmp.path / "run.cfg").string() + " --out " +
                       (tmp.path / "out").string() + " solve");
    CHECK(rc == 4);
    const int rcw = run("--config " + (tmp.path / "run.cfg").string() + " --out " +
                        (tmp.path / "outw").string() + " weight");
    CHECK(rcw == 4);  // weight command reports infeasibility itself
}

TEST_CASE("weight command with a sweep") {
    TmpDir tmp;
    write_config(tmp.path / "run.cfg");
    const int rc = run("--config " + (tmp.path / "run.cfg").string() + " --out " +
                       (tmp.path / "out").string() + " weight --sweep");
    CHECK(rc == 0);
    const auto j = nlohmann::json::parse(slurp(tmp.path / "out" / "weight.json"));
    CHECK(j["feasible"].get<bool>());
    CHECK(j["min_margin"].get<double>() >= 1e-3);
    const std::string sweep = slurp(tmp.path / "out" / "weight_sweep.csv");
    CHECK(sweep.rfind("L,feasible,min_margin\n", 0) == 0);
}

TEST_CASE("config errors exit with the dedicated code") {
    TmpDir tmp;
    {
        std::ofstream out(tmp.path / "bad.cfg");
        out << "nonsense.key = 1\n";
    }
    CHECK(run("--config " + (tmp.path / "bad.cfg").string() + " background") == 2);
    CHECK(run("--set duct.n2=oops background") == 2);
}

TEST_CASE("solve-linear writes modal table and residual report") {
    TmpDir tmp;
    write_config(tmp.path / "run.cfg");
    const int rc = run("--config " + (tmp.path / "run.cfg").string() + " --out " +
                       (tmp.path / "out").string() + " solve-linear");
    CHECK(rc == 0);
    const std::string modal = slurp(tmp.path / "out" / "modal.csv");
    CHECK(modal.rfind("x1,mode,k,l,theta,Theta\n", 0) == 0);
    const auto j = nlohmann::json::parse(slurp(tmp.path / "out" / "linear.json"));
    CHECK(j["residual"]["bc"]["cap_gammaL"].get<double>() <= 1e-10);
}

TEST_CASE("sweep command emits the scaling table") {
    TmpDir tmp;
    write_config(tmp.path / "run.cfg", "sweep.sigma_factors = 1e-2,1e-3\n");
    const int rc = run("--config " + (tmp.path / "run.cfg").string() + " --out " +
                       (tmp.path / "out").string() + " sweep");
    CHECK(rc == 0);
    const auto j = nlohmann::json::parse(slurp(tmp.path / "out" / "sweep.json"));
    CHECK(j["rows"].size() == 2);
    CHECK(j["ratio_spread"].get<double>() <= 0.2);
}

TEST_CASE("verify command, including the negative controls") {
    TmpDir tmp;
    write_config(tmp.path / "run.cfg",
                 "verify.n1_list = 21,41\nsolver.m_max = 3\nduct.n2 = 13\nduct.n3 = 13\n");
    const int rc = run("--config " + (tmp.path / "run.cfg").string() + " --out " +
                       (tmp.path / "out").string() + " verify");
    CHECK(rc == 0);
    const auto j = nlohmann::json::parse(slurp(tmp.path / "out" / "verify.json"));
    CHECK(j["pass"].get<bool>());

    const int rc2 = run("--config " + (tmp.path / "run.cfg").string() + " --out " +
                        (tmp.path / "outc").string() + " verify --inject-corruption");
    CHECK(rc2 == 0);  // corruption must be *detected*, which is a pass
    const auto jc = nlohmann::json::parse(slurp(tmp.path / "outc" / "verify.json"));
    CHECK(jc["audit"]["pass"].get<bool>() == false);
    CHECK(jc["residual_negative_control"]["detected"].get<bool>());
}
