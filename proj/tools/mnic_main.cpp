#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mnic/driver.hpp"

int main(int argc, char** argv) {
    CLI::App app{"minimum-norm interpolation and ridge classification experiments"};

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    int threads = -1;
    bool strict = false;
    bool lenient = false;

    app.add_option("--config", config_path, "JSON experiment config")->required();
    auto* seed_opt = app.add_option("--seed", seed, "override the config seed");
    auto* out_opt = app.add_option("--out", out_dir, "override the output directory");
    auto* thr_opt = app.add_option("--threads", threads, "worker thread count");
    app.add_flag("--strict", strict, "error out on rank-deficient points");
    app.add_flag("--lenient", lenient, "skip rank-deficient points");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (strict && lenient) {
        std::cerr << "error: --strict and --lenient are mutually exclusive\n";
        return 2;
    }

    mnic::ExperimentConfig cfg;
    try {
        cfg = mnic::load_config(config_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }

    if (seed_opt->count()) cfg.seed = seed;
    if (out_opt->count()) cfg.output_dir = out_dir;
    if (thr_opt->count()) cfg.threads = threads;
    if (strict) cfg.policy = mnic::RankPolicy::Strict;
    if (lenient) cfg.policy = mnic::RankPolicy::Lenient;

    return mnic::run_experiment(cfg);
}
