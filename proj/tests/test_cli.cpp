#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "qhdlab/experiment.hpp"

using namespace qhdlab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& name) {
    fs::path p = fs::temp_directory_path() / "qhdlab_test" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("empty config gives the documented defaults") {
    auto spec = parse_config("");
    CHECK(spec.experiment.empty());
    CHECK(spec.sim.m == 1.0);
    CHECK(spec.sim.eps == 1.0);
    CHECK(spec.sim.q == 1);
    CHECK(spec.out_dir == "out");
    CHECK(spec.q_list == std::vector<int>{8, 16, 32});
}

TEST_CASE("config parsing: sections, comments, lists") {
    std::string text = R"(
# a comment
experiment = toy-cascade
seed = 99
[sim]
m = 2.0
eps = 0.5   # inline comment
N = 6
[toy-cascade]
nu = 1e-4
target_fraction = 0.8
[approximation]
q_list = 4, 8, 16
)";
    auto spec = parse_config(text);
    CHECK(spec.experiment == "toy-cascade");
    CHECK(spec.sim.seed == 99);
    CHECK(spec.sim.m == 2.0);
    CHECK(spec.sim.eps == 0.5);
    CHECK(spec.sim.N == 6);
    CHECK(spec.nu == 1e-4);
    CHECK(spec.target_fraction == 0.8);
    CHECK(spec.q_list == std::vector<int>{4, 8, 16});
}

TEST_CASE("config errors carry the offending line") {
    CHECK_THROWS_AS(parse_config("experiment = x\nbogus_key = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[nosuchsection]\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[sim]\neps = 0\n"), ConfigError);   // eps in (0, 1]
    CHECK_THROWS_AS(parse_config("[sim]\neps = zero\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[sim]\nq = 2.5\n"), ConfigError);   // non-integer q
    CHECK_THROWS_AS(parse_config("[sim]\nm = -1\n"), ConfigError);
    try {
        parse_config("experiment = x\n\nbad line without equals\n");
        CHECK(false);
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
}

TEST_CASE("verify experiment produces artifacts and a passing summary") {
    auto out = fresh_dir("verify");
    ExperimentSpec spec;
    spec.experiment = "verify";
    spec.sim.N = 3;
    spec.G = 6;
    spec.sim.q = 2;
    spec.sim.seed = 42;
    spec.out_dir = out.string();
    auto rr = run_experiment(spec);
    CHECK(rr.exit_code == 0);
    CHECK(rr.summary["pass"] == true);
    CHECK(fs::exists(out / "lambda.json"));
    CHECK(fs::exists(out / "report.json"));
    CHECK(fs::exists(out / "weights.csv"));
    CHECK(fs::exists(out / "manifest.json"));
    auto rep = nlohmann::json::parse(slurp(out / "report.json"));
    CHECK(rep["all_pass"] == true);
}

TEST_CASE("determinism: identical spec and seed give byte-identical CSV bodies") {
    auto out1 = fresh_dir("det1"), out2 = fresh_dir("det2");
    ExperimentSpec spec;
    spec.experiment = "nls-run";
    spec.sim.N = 3;
    spec.sim.q = 2;
    spec.sim.seed = 7;
    spec.sim.dt = 1e-3;
    spec.T = 0.05;
    spec.nsamples = 3;
    spec.out_dir = out1.string();
    auto r1 = run_experiment(spec);
    spec.out_dir = out2.string();
    auto r2 = run_experiment(spec);
    CHECK(r1.exit_code == 0);
    CHECK(r2.exit_code == 0);
    CHECK(slurp(out1 / "invariants.csv") == slurp(out2 / "invariants.csv"));
    CHECK(slurp(out1 / "norms.csv") == slurp(out2 / "norms.csv"));
    CHECK(!slurp(out1 / "invariants.csv").empty());
}

TEST_CASE("nls-run on a sublattice asserts invariance and conservation") {
    auto out = fresh_dir("nlsrun");
    ExperimentSpec spec;
    spec.experiment = "nls-run";
    spec.sim.q = 4;
    spec.sim.cutoff = 16;
    spec.sim.dt = 1e-3;
    spec.T = 0.1;
    spec.out_dir = out.string();
    auto rr = run_experiment(spec);
    CHECK(rr.exit_code == 0);
    bool saw_sublattice = false;
    for (auto& chk : rr.summary["checks"])
        if (chk["name"] == "sublattice_invariance") {
            saw_sublattice = true;
            CHECK(chk["pass"] == true);
        }
    CHECK(saw_sublattice);
}

TEST_CASE("toy-cascade experiment emits trajectory and cascade artifacts") {
    auto out = fresh_dir("cascade");
    ExperimentSpec spec;
    spec.experiment = "toy-cascade";
    spec.sim.N = 5;
    spec.nu = 1e-2;
    spec.target_fraction = 0.6;
    spec.out_dir = out.string();
    auto rr = run_experiment(spec);
    CHECK(rr.exit_code == 0);
    CHECK(fs::exists(out / "trajectory.csv"));
    auto cj = nlohmann::json::parse(slurp(out / "cascade.json"));
    CHECK(cj["peak_fraction"].get<double>() >= 0.6);
}

TEST_CASE("equivalence sweep passes its window checks") {
    auto out = fresh_dir("equiv");
    ExperimentSpec spec;
    spec.experiment = "equivalence-sweep";
    spec.out_dir = out.string();
    auto rr = run_experiment(spec);
    CHECK(rr.exit_code == 0);
    CHECK(fs::exists(out / "equivalence.csv"));
}

TEST_CASE("divisor audit emits the CSV report") {
    auto out = fresh_dir("divaudit");
    ExperimentSpec spec;
    spec.experiment = "divisor-audit";
    spec.sim.N = 3;
    spec.G = 6;
    spec.sim.q = 16;
    spec.sim.seed = 42;
    spec.out_dir = out.string();
    auto rr = run_experiment(spec);
    CHECK(rr.exit_code == 0);
    auto csv = slurp(out / "divisors.csv");
    CHECK(csv.find("class,modes,signs,value,bound,margin") != std::string::npos);
    CHECK(csv.find("family") != std::string::npos);
}

TEST_CASE("unknown experiment is a config error") {
    ExperimentSpec spec;
    spec.experiment = "frobnicate";
    CHECK_THROWS_AS(run_experiment(spec), ConfigError);
}
