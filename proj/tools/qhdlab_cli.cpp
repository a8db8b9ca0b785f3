// Batch experiment runner. Precedence for the overridable settings is
// command-line flag > environment variable > config file > built-in default;
// the environment variables are QHDLAB_EXPERIMENT, QHDLAB_OUT, QHDLAB_SEED
// and QHDLAB_THREADS. Exit codes: 0 pass, 2 assertion failure, 3 bad config.

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "qhdlab/acceptance.hpp"
#include "qhdlab/experiment.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw qhdlab::ConfigError("cannot read config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_acceptance(const qhdlab::ExperimentSpec& spec) {
    namespace fs = std::filesystem;
    auto results = qhdlab::acceptance::run_criteria(spec.criteria);
    nlohmann::json rows = nlohmann::json::array();
    bool all = true;
    for (auto& r : results) {
        std::cout << qhdlab::acceptance::format_result(r) << "\n";
        rows.push_back(
            {{"criterion", r.id}, {"pass", r.pass}, {"detail", r.detail}, {"seconds", r.seconds}});
        all = all && r.pass;
    }
    fs::create_directories(spec.out_dir);
    std::ofstream out(fs::path(spec.out_dir) / "acceptance.json");
    out << nlohmann::json({{"results", rows}, {"pass", all}}).dump(2) << "\n";
    std::cout << (all ? "acceptance: all criteria passed" : "acceptance: FAILURES present")
              << std::endl;
    return all ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qhdlab - plane-wave instability laboratory"};

    std::string config_path, experiment, out_dir;
    std::uint64_t seed = 0;
    int threads = -1;
    auto* copt = app.add_option("--config", config_path, "config file (key = value with [sections])");
    auto* eopt = app.add_option("--experiment", experiment,
                                "experiment name (lambda-gen, verify, divisor-audit, toy-cascade, "
                                "nls-run, approximation-sweep, equivalence-sweep, growth, "
                                "acceptance)");
    auto* oopt = app.add_option("--out", out_dir, "output directory");
    auto* sopt = app.add_option("--seed", seed, "RNG seed");
    auto* topt = app.add_option("--threads", threads, "worker threads");

    CLI11_PARSE(app, argc, argv);

    try {
        qhdlab::ExperimentSpec spec;
        if (copt->count()) spec = qhdlab::parse_config(read_file(config_path));

        if (const char* v = std::getenv("QHDLAB_EXPERIMENT")) spec.experiment = v;
        if (const char* v = std::getenv("QHDLAB_OUT")) spec.out_dir = v;
        if (const char* v = std::getenv("QHDLAB_SEED")) spec.sim.seed = std::strtoull(v, nullptr, 10);
        if (const char* v = std::getenv("QHDLAB_THREADS")) spec.threads = std::atoi(v);

        if (eopt->count()) spec.experiment = experiment;
        if (oopt->count()) spec.out_dir = out_dir;
        if (sopt->count()) spec.sim.seed = seed;
        if (topt->count()) spec.threads = threads;

        if (spec.experiment.empty())
            throw qhdlab::ConfigError("no experiment selected (flag, env or config)");
        if (spec.threads > 0) qhdlab::WorkerPool::instance().set_threads(spec.threads);

        if (spec.experiment == "acceptance") return run_acceptance(spec);

        auto rr = qhdlab::run_experiment(spec);
        std::cout << rr.summary.dump(2) << std::endl;
        return rr.exit_code;
    } catch (const qhdlab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << std::endl;
        return 3;
    } catch (const qhdlab::Error& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 2;
    }
}
