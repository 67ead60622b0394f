#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mnic/genmodels.hpp"
#include "mnic/interpolator.hpp"
#include "mnic/kernels.hpp"
#include "mnic/types.hpp"

namespace mnic {

enum class OutputFormat { Csv, Jsonl };

// Everything a run needs, parsed from a JSON config file and optionally
// overridden by command-line flags. The seed is mandatory: runs never pull
// entropy from the environment.
struct ExperimentConfig {
    std::string command;

    KernelSpec kernel;
    double lambda = 0.0;

    std::optional<GenerativeModelSpec> model;

    std::size_t n = 0;
    std::vector<std::size_t> n_grid;
    std::size_t trials = 1;
    std::size_t test_size = 0;
    std::size_t redraws = 0;

    std::optional<std::uint64_t> seed;

    BoundConstants constants;

    // region-map window
    double region_alpha = 0.25;
    bool region_allow_ridge = false;
    double region_x_min = 0.05, region_x_max = 3.0;
    double region_y_min = 1.05, region_y_max = 3.0;
    std::size_t region_grid_x = 50, region_grid_y = 50;

    // separation
    double eta_cap = 0.0;
    double epsilon = 0.0;  // <= 0 means 1/n

    double tol_rank = 1e-10;
    RankPolicy policy = RankPolicy::Strict;

    std::string output_dir = ".";
    OutputFormat format = OutputFormat::Csv;
    int threads = 0;  // 0 = leave runtime default

    std::optional<Dataset> data;
    std::string data_path;

    void validate() const;  // throws std::invalid_argument
};

// Parse from a JSON document / file. Unknown keys are rejected, so a typo
// fails loudly rather than silently running defaults.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

// Canonical re-serialization (sorted keys), echoed into the run manifest.
std::string config_to_json(const ExperimentConfig& cfg);

// Whitespace- or comma-separated numeric matrix, one row per line, last
// column the label. '#' starts a comment line.
Dataset read_matrix_file(const std::string& path);

} // namespace mnic
