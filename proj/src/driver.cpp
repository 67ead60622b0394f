#include "mnic/driver.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <json.hpp>

#include "mnic/csv.hpp"
#include "mnic/genmodels.hpp"
#include "mnic/regret.hpp"
#include "mnic/separation.hpp"

namespace mnic {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kToolVersion = "0.1.0";

std::string table_name(const ExperimentConfig& cfg, const std::string& stem) {
    return (fs::path(cfg.output_dir) /
            (stem + (cfg.format == OutputFormat::Jsonl ? ".jsonl" : ".csv")))
        .string();
}

void write_manifest(const ExperimentConfig& cfg,
                    const std::vector<std::string>& outputs) {
    json m;
    m["schema_version"] = 1;
    m["tool_version"] = kToolVersion;
    m["git_hash"] = "unknown";
    m["command"] = cfg.command;
    m["config"] = json::parse(config_to_json(cfg));
    json files = json::array();
    for (const std::string& p : outputs)
        files.push_back(fs::path(p).filename().string());
    m["outputs"] = files;
    std::ofstream out(fs::path(cfg.output_dir) / "manifest.json");
    out << m.dump(2) << '\n';
}

void write_error_record(const ExperimentConfig& cfg, const std::string& kind,
                        const std::string& detail) {
    std::error_code ec;
    fs::create_directories(cfg.output_dir, ec);
    std::ofstream out(fs::path(cfg.output_dir) / "error.json");
    if (!out) return;
    json e;
    e["error"] = kind;
    e["detail"] = detail;
    e["command"] = cfg.command;
    out << e.dump(2) << '\n';
}

Dataset resolve_dataset(const ExperimentConfig& cfg) {
    if (cfg.data) return *cfg.data;
    if (!cfg.data_path.empty()) return read_matrix_file(cfg.data_path);
    Rng rng = make_rng(derive_seed(*cfg.seed, 0));
    GenerativeModelSpec model = *cfg.model;
    if (model.dim == 0) model.dim = model.ambient_dim(cfg.n);
    return sample(model, cfg.n, rng);
}

KernelSpec kernel_for(const ExperimentConfig& cfg, const Dataset& data) {
    KernelSpec k = cfg.kernel;
    if (k.input_dim == 0) k.input_dim = data.dim();
    return k;
}

int cmd_fit(const ExperimentConfig& cfg) {
    const Dataset data = resolve_dataset(cfg);
    const Interpolator fit = fit_batch(kernel_for(cfg, data), data, cfg.lambda,
                                       cfg.policy, cfg.tol_rank);

    TableWriter t(table_name(cfg, "fit"), {"quantity", "index", "value"},
                  cfg.format == OutputFormat::Jsonl);
    for (std::size_t i = 0; i < fit.size(); ++i)
        t.write_row({std::string("alpha"), std::uint64_t(i), fit.dual()[i]});
    for (std::size_t i = 0; i < fit.size(); ++i)
        t.write_row({std::string("label"), std::uint64_t(i), fit.labels()[i]});
    for (std::size_t i = 0; i < fit.size(); ++i)
        t.write_row({std::string("prediction"), std::uint64_t(i),
                     fit.predict(fit.points()[i])});
    t.write_row({std::string("norm_sq"), std::uint64_t(0), fit.norm_sq()});
    t.write_row({std::string("lambda"), std::uint64_t(0), cfg.lambda});
    t.write_row({std::string("n"), std::uint64_t(0),
                 static_cast<double>(fit.size())});
    t.write_row({std::string("skipped"), std::uint64_t(0),
                 static_cast<double>(fit.skipped())});
    t.close();
    write_manifest(cfg, {t.path()});
    return 0;
}

int cmd_online(const ExperimentConfig& cfg) {
    const Dataset data = resolve_dataset(cfg);
    Interpolator state(kernel_for(cfg, data), cfg.lambda, cfg.policy,
                       cfg.tol_rank);
    if (cfg.policy == RankPolicy::Lenient) state.set_log_skips(true);

    TableWriter t(table_name(cfg, "online"),
                  {"i", "epsilon", "s_sq", "increment", "norm_sq", "mistake"},
                  cfg.format == OutputFormat::Jsonl);
    std::uint64_t i = 0;
    for (std::size_t r = 0; r < data.size(); ++r) {
        const double y = data.labels[r];
        const StepResult res = state.step(data.points[r], y);
        if (res.skipped) continue;
        const StepRecord& rec = state.step_log().back();
        const double pred = y - res.epsilon;
        t.write_row({++i, rec.epsilon, rec.s_sq, rec.norm_increment,
                     state.norm_sq(), std::uint64_t(y * pred <= 0.0 ? 1 : 0)});
    }
    t.close();
    write_manifest(cfg, {t.path()});
    return 0;
}

int cmd_regret(const ExperimentConfig& cfg) {
    const Dataset data = resolve_dataset(cfg);
    Interpolator state(kernel_for(cfg, data), cfg.lambda, cfg.policy,
                       cfg.tol_rank);
    for (std::size_t r = 0; r < data.size(); ++r)
        state.step(data.points[r], data.labels[r]);
    const RegretReport rep = build_report(state);

    TableWriter t(table_name(cfg, "regret"), {"quantity", "value"},
                  cfg.format == OutputFormat::Jsonl);
    t.write_row({std::string("n"), static_cast<double>(rep.n)});
    t.write_row({std::string("sq_loss"), rep.sq_loss});
    t.write_row({std::string("mistakes"), static_cast<double>(rep.mistakes)});
    t.write_row({std::string("R_n_sq"), rep.R_n_sq});
    t.write_row({std::string("r_n_sq"), rep.r_n_sq});
    t.write_row({std::string("norm_sq_final"), rep.norm_sq_final});
    t.write_row({std::string("lower_bound"), rep.lower_bound});
    t.write_row({std::string("upper_bound"), rep.upper_bound});
    t.close();

    TableWriter steps(table_name(cfg, "regret_steps"),
                      {"i", "epsilon", "s_sq", "increment"},
                      cfg.format == OutputFormat::Jsonl);
    for (std::size_t i = 0; i < rep.per_step.size(); ++i)
        steps.write_row({std::uint64_t(i + 1), rep.per_step[i].epsilon,
                         rep.per_step[i].s_sq, rep.per_step[i].norm_increment});
    steps.close();
    write_manifest(cfg, {t.path(), steps.path()});
    return 0;
}

int cmd_simulate(const ExperimentConfig& cfg) {
    KernelSpec kernel = cfg.kernel;  // dimension varies across the grid
    const NormGrowthTrace trace =
        norm_growth_experiment(*cfg.model, kernel, cfg.n_grid, cfg.trials,
                               *cfg.seed, cfg.policy, cfg.lambda);

    TableWriter t(table_name(cfg, "norm_growth"),
                  {"n", "quantity", "value", "stderr"},
                  cfg.format == OutputFormat::Jsonl);
    for (const TraceRow& row : trace.rows) {
        t.write_row({std::uint64_t(row.n), std::string("norm_sq"),
                     row.norm_mean, row.norm_se});
        t.write_row({std::uint64_t(row.n), std::string("mistakes"),
                     row.mistakes_mean, row.mistakes_se});
        t.write_row({std::uint64_t(row.n), std::string("theory_norm"),
                     row.theory_norm, 0.0});
        t.write_row({std::uint64_t(row.n), std::string("theory_mistakes"),
                     row.theory_mistakes, 0.0});
    }
    t.close();

    std::vector<std::string> outputs = {t.path()};
    if (cfg.command == "simulate-mixture") {
        TableWriter parts(table_name(cfg, "bound_parts"),
                          {"n", "quantity", "value"},
                          cfg.format == OutputFormat::Jsonl);
        for (std::size_t n : cfg.n_grid) {
            const MixtureBoundParts mb =
                mixture_regret_bound(*cfg.model, n, cfg.lambda, cfg.constants);
            parts.write_row({std::uint64_t(n), std::string("value"), mb.value});
            parts.write_row({std::uint64_t(n), std::string("mu_sq"), mb.mu_sq});
            parts.write_row({std::uint64_t(n), std::string("trace"), mb.trace});
            parts.write_row({std::uint64_t(n), std::string("gamma_p"), mb.gamma_p});
            parts.write_row(
                {std::uint64_t(n), std::string("lambda_1_eff"), mb.lambda_1_eff});
            parts.write_row(
                {std::uint64_t(n), std::string("lambda_p_eff"), mb.lambda_p_eff});
            parts.write_row({std::uint64_t(n), std::string("theta_cov_theta"),
                             mb.theta_cov_theta});
            parts.write_row({std::uint64_t(n), std::string("np_ratio"), mb.np_ratio});
            parts.write_row(
                {std::uint64_t(n), std::string("numerator"), mb.numerator});
            parts.write_row(
                {std::uint64_t(n), std::string("denominator"), mb.denominator});
        }
        parts.close();
        outputs.push_back(parts.path());
    }
    if (cfg.command == "simulate-gmm" && cfg.model->mu > 0.0) {
        const auto rows =
            r_n_lower_check(*cfg.model, cfg.n_grid, cfg.trials, *cfg.seed);
        TableWriter rn(table_name(cfg, "r_n_fit"),
                       {"n", "r_n_sq_mean", "r_n_sq_se", "c_hat"},
                       cfg.format == OutputFormat::Jsonl);
        for (const RnFitRow& row : rows)
            rn.write_row({std::uint64_t(row.n), row.r_n_sq_mean, row.r_n_sq_se,
                          row.c_hat});
        rn.close();
        outputs.push_back(rn.path());
    }
    write_manifest(cfg, outputs);
    return 0;
}

int cmd_region_map(const ExperimentConfig& cfg) {
    TableWriter t(table_name(cfg, "region_map"), {"x_exp", "y_exp", "region"},
                  cfg.format == OutputFormat::Jsonl);
    for (std::size_t iy = 0; iy < cfg.region_grid_y; ++iy) {
        const double y = cfg.region_y_min +
                         (cfg.region_y_max - cfg.region_y_min) *
                             static_cast<double>(iy) /
                             static_cast<double>(cfg.region_grid_y - 1);
        for (std::size_t ix = 0; ix < cfg.region_grid_x; ++ix) {
            const double x = cfg.region_x_min +
                             (cfg.region_x_max - cfg.region_x_min) *
                                 static_cast<double>(ix) /
                                 static_cast<double>(cfg.region_grid_x - 1);
            const Region r = region_classify(x, y, cfg.region_alpha,
                                             cfg.region_allow_ridge);
            t.write_row({x, y, std::string(region_name(r))});
        }
    }
    t.close();
    write_manifest(cfg, {t.path()});
    return 0;
}

int cmd_separation(const ExperimentConfig& cfg) {
    const SeparationReport rep =
        separation_report(*cfg.model, cfg.n, cfg.eta_cap, cfg.epsilon,
                          *cfg.seed, cfg.redraws);

    TableWriter t(table_name(cfg, "separation"), {"quantity", "value"},
                  cfg.format == OutputFormat::Jsonl);
    t.write_row({std::string("n"), static_cast<double>(rep.n)});
    t.write_row({std::string("bayes_error"), rep.bayes_err});
    t.write_row({std::string("tv"), rep.tv});
    t.write_row({std::string("tv_exp_form"), rep.tv_exp_form});
    t.write_row({std::string("cond_norm_bound"), rep.cond_norm_bound});
    t.write_row({std::string("separation_prob"), rep.separation_prob});
    t.write_row({std::string("r_n_sq"), rep.r_n_sq});
    t.write_row({std::string("eta_cap"), rep.eta_cap});
    t.write_row({std::string("epsilon"), rep.epsilon});
    if (rep.redraws > 0) {
        t.write_row({std::string("redraws"), static_cast<double>(rep.redraws)});
        t.write_row({std::string("norm_mc_mean"), rep.norm_mc_mean});
        t.write_row({std::string("norm_mc_se"), rep.norm_mc_se});
    }
    t.close();
    write_manifest(cfg, {t.path()});
    return 0;
}

int cmd_sweep(const ExperimentConfig& cfg) {
    const GeneralizationEstimate est = estimate_generalization(
        *cfg.model, cfg.kernel, cfg.lambda, cfg.n_grid, cfg.trials,
        cfg.test_size, *cfg.seed, cfg.policy);

    TableWriter t(table_name(cfg, "generalization"),
                  {"n", "quantity", "value", "stderr"},
                  cfg.format == OutputFormat::Jsonl);
    for (const GeneralizationRow& row : est.rows) {
        t.write_row({std::uint64_t(row.n), std::string("est_min_risk"),
                     row.est_min_risk, row.est_min_risk_se});
        t.write_row({std::uint64_t(row.n), std::string("est_final_risk"),
                     row.est_final_risk, row.est_final_risk_se});
        t.write_row({std::uint64_t(row.n), std::string("est_polyak_risk"),
                     row.est_polyak_risk, row.est_polyak_risk_se});
        t.write_row({std::uint64_t(row.n), std::string("bound"), row.bound,
                     row.bound_se});
        t.write_row({std::uint64_t(row.n), std::string("polyak_bound"),
                     row.polyak_bound, row.polyak_bound_se});
        t.write_row({std::uint64_t(row.n), std::string("discarded_trials"),
                     static_cast<double>(row.discarded_trials), 0.0});
    }
    t.close();
    write_manifest(cfg, {t.path()});
    return 0;
}

} // namespace

int run_experiment(const ExperimentConfig& cfg) {
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }

#ifdef _OPENMP
    if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
#endif

    try {
        fs::create_directories(cfg.output_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: cannot create output directory: " << e.what() << '\n';
        return 2;
    }

    try {
        if (cfg.command == "fit") return cmd_fit(cfg);
        if (cfg.command == "online") return cmd_online(cfg);
        if (cfg.command == "regret") return cmd_regret(cfg);
        if (cfg.command == "simulate-gmm" || cfg.command == "simulate-mixture")
            return cmd_simulate(cfg);
        if (cfg.command == "region-map") return cmd_region_map(cfg);
        if (cfg.command == "separation") return cmd_separation(cfg);
        if (cfg.command == "sweep") return cmd_sweep(cfg);
        std::cerr << "error: unknown command '" << cfg.command << "'\n";
        return 2;
    } catch (const RankDeficientError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        write_error_record(cfg, "rank_deficient", e.what());
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        write_error_record(cfg, "invalid_config", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        write_error_record(cfg, "runtime", e.what());
        return 3;
    }
}

} // namespace mnic
