#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "nonexp/nonexp.hpp"

namespace {

constexpr int kPass = 0;
constexpr int kError = 1;
constexpr int kFail = 2;

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out_dir = "out";
    double tol_scale = 1.0;
    std::size_t jobs = 0;
};

void print_list(const char* title, const std::vector<std::string>& names) {
    std::cout << title << ":\n";
    auto sorted = names;
    std::sort(sorted.begin(), sorted.end());
    for (const auto& n : sorted) std::cout << "  " << n << "\n";
}

int list_builtins() {
    print_list("mappings", nonexp::config::mapping_kinds());
    print_list("sets", nonexp::config::set_kinds());
    print_list("schemes", nonexp::config::scheme_kinds());
    print_list("counterexamples", nonexp::counterexample_names());
    print_list("experiments", {"counterexample", "ergodic", "hybrid", "pipeline"});
    return kPass;
}

nonexp::config::ExperimentConfig load(const Options& o) {
    auto cfg = nonexp::config::load_experiment(o.config, o.tol_scale);
    if (o.seed) cfg.seed = *o.seed;
    return cfg;
}

int check(const Options& o) {
    const auto cfg = load(o);
    std::cout << o.config << ": ok (" << nonexp::config::to_string(cfg.kind) << ", "
              << cfg.start_points.size() << " start point(s))\n";
    return kPass;
}

int run(const Options& o) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto cfg = load(o);
    const std::size_t jobs = o.jobs ? o.jobs : std::max(1u, std::thread::hardware_concurrency());
    const auto res = nonexp::run_experiment(cfg, jobs);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const auto out = nonexp::write_outputs(o.out_dir, cfg, res, wall);
    for (const auto& p : out.paths) std::cout << "wrote " << p.string() << "\n";
    std::cout << (res.passed ? "PASS" : "FAIL") << " " << (cfg.name.empty() ? o.config : cfg.name) << "\n";
    return res.passed ? kPass : kFail;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nonexpansive semigroup experiments: attractive points, mean vectors and ergodic limits"};
    app.set_version_flag("--version", NONEXP_VERSION);
    app.require_subcommand(1);
    Options o;

    auto* run_cmd = app.add_subcommand("run", "Run an experiment config and write trace.csv, summary.json, manifest.json");
    run_cmd->add_option("config", o.config, "Experiment config (JSON)")->required();
    run_cmd->add_option("--seed", o.seed, "Override the config seed");
    run_cmd->add_option("--out-dir", o.out_dir, "Output directory")->capture_default_str();
    run_cmd->add_option("--tol-scale", o.tol_scale, "Multiplies every default tolerance")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    run_cmd->add_option("--jobs", o.jobs, "Worker threads (0 = all cores)")->capture_default_str();

    auto* check_cmd = app.add_subcommand("check", "Validate a config without running it");
    check_cmd->add_option("config", o.config, "Experiment config (JSON)")->required();
    check_cmd->add_option("--tol-scale", o.tol_scale, "Multiplies every default tolerance")
        ->check(CLI::PositiveNumber);

    app.add_subcommand("list", "List mapping kinds, set kinds, schemes and counterexamples");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kPass : kError;
    }

    try {
        if (*run_cmd) return run(o);
        if (*check_cmd) return check(o);
        return list_builtins();
    } catch (const nonexp::ConfigError& e) {
        std::cerr << "config error at " << e.what() << "\n";
        return kError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kError;
    }
}
