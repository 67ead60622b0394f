#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mnic/config.hpp"
#include "mnic/csv.hpp"
#include "mnic/driver.hpp"

using namespace mnic;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / "mnic_tests" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t line_count(const std::string& text) {
    std::size_t n = 0;
    for (char c : text)
        if (c == '\n') ++n;
    return n;
}

} // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("config parsing rejects noise") {
    CHECK_THROWS_AS(parse_config("not json at all"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("[1,2,3]"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("{}"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config(R"({"command":"fit","typo_key":1})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_config(R"({"command":"fit","kernel":{"bw":2}})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        parse_config(R"({"command":"fit","model":{"kind":"gmm","extra":1}})"),
        std::invalid_argument);
    CHECK_THROWS_AS(parse_config(R"({"command":"fit","policy":"loose"})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_config(R"({"command":"fit","format":"xml"})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        parse_config(R"({"command":"fit","kernel":{"kind":"laplace"}})"),
        std::invalid_argument);
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"),
                    std::invalid_argument);
}

TEST_CASE("config defaults and round trip") {
    const ExperimentConfig cfg = parse_config(R"({
        "command": "fit",
        "seed": 7,
        "data": [[1, 0, 1], [0, 1, -1]]
    })");
    CHECK(cfg.command == "fit");
    CHECK(cfg.kernel.kind == KernelKind::Linear);
    CHECK(cfg.lambda == 0.0);
    CHECK(cfg.trials == 1);
    CHECK(*cfg.seed == 7);
    CHECK(cfg.policy == RankPolicy::Strict);
    CHECK(cfg.format == OutputFormat::Csv);
    REQUIRE(cfg.data.has_value());
    CHECK(cfg.data->size() == 2);
    CHECK(cfg.data->labels == Vec{1.0, -1.0});
    CHECK_NOTHROW(cfg.validate());

    // The canonical echo re-parses to the same canonical echo.
    const std::string echo = config_to_json(cfg);
    const ExperimentConfig back = parse_config(echo);
    CHECK(config_to_json(back) == echo);
}

TEST_CASE("validation failures return exit code 2") {
    ExperimentConfig cfg = parse_config(R"({
        "command": "fit",
        "data": [[1, 0, 1], [0, 1, -1]]
    })");
    CHECK(!cfg.seed.has_value());
    CHECK_THROWS_WITH_AS(cfg.validate(),
                         "config: a seed is required (config 'seed' or --seed)",
                         std::invalid_argument);
    CHECK(run_experiment(cfg) == 2);

    ExperimentConfig unknown = cfg;
    unknown.seed = 1;
    unknown.command = "explode";
    CHECK(run_experiment(unknown) == 2);

    ExperimentConfig no_inputs = parse_config(R"({"command":"fit","seed":3})");
    CHECK(run_experiment(no_inputs) == 2);

    ExperimentConfig bad_sweep = parse_config(R"({
        "command": "sweep", "seed": 3, "n_grid": [4, 8],
        "model": {"kind": "gmm", "mu": 1.0, "psi": 2.0}
    })");
    CHECK(run_experiment(bad_sweep) == 2);  // test_size missing

    ExperimentConfig gmm_mismatch = parse_config(R"({
        "command": "simulate-gmm", "seed": 3, "n_grid": [4, 8],
        "model": {"kind": "mixture", "mu": 1.0, "dim": 16}
    })");
    CHECK(run_experiment(gmm_mismatch) == 2);
}

TEST_CASE("fit on inline data writes the table and manifest") {
    const fs::path dir = fresh_dir("fit_inline");
    ExperimentConfig cfg = parse_config(R"({
        "command": "fit",
        "seed": 11,
        "kernel": {"kind": "gaussian", "bandwidth": 1.0},
        "data": [[0, 0, 1], [1, 0, -1], [0, 1, -1], [1, 1, 1]]
    })");
    cfg.output_dir = dir.string();
    REQUIRE(run_experiment(cfg) == 0);

    const std::string table = slurp(dir / "fit.csv");
    CHECK(table.rfind("quantity,index,value\n", 0) == 0);
    // 4 alphas + 4 labels + 4 predictions + 4 scalars.
    CHECK(line_count(table) == 17);

    // Interpolation: predictions echo the labels.
    std::istringstream rows(table);
    std::string line;
    std::getline(rows, line);
    std::size_t checked = 0;
    while (std::getline(rows, line)) {
        if (line.rfind("prediction,", 0) != 0) continue;
        const std::size_t comma = line.find_last_of(',');
        const double value = std::stod(line.substr(comma + 1));
        const double expect = checked == 0 || checked == 3 ? 1.0 : -1.0;
        CHECK(value == doctest::Approx(expect).epsilon(1e-9));
        ++checked;
    }
    CHECK(checked == 4);

    const nlohmann::json manifest =
        nlohmann::json::parse(slurp(dir / "manifest.json"));
    CHECK(manifest.at("schema_version") == 1);
    CHECK(manifest.at("command") == "fit");
    CHECK(manifest.at("outputs") == nlohmann::json::array({"fit.csv"}));
    CHECK(manifest.at("config").at("seed") == 11);
    CHECK(!manifest.contains("timestamp"));
}

TEST_CASE("reruns are byte identical") {
    const std::string base = R"({
        "command": "simulate-gmm",
        "seed": 21,
        "kernel": {"kind": "linear"},
        "model": {"kind": "gmm", "mu": 2.0, "psi": 2.0},
        "n_grid": [10, 20],
        "trials": 3
    })";
    const fs::path d1 = fresh_dir("rerun_a");
    const fs::path d2 = fresh_dir("rerun_b");
    ExperimentConfig c1 = parse_config(base);
    c1.output_dir = d1.string();
    ExperimentConfig c2 = parse_config(base);
    c2.output_dir = d2.string();
    REQUIRE(run_experiment(c1) == 0);
    REQUIRE(run_experiment(c2) == 0);
    CHECK(slurp(d1 / "norm_growth.csv") == slurp(d2 / "norm_growth.csv"));
    CHECK(slurp(d1 / "r_n_fit.csv") == slurp(d2 / "r_n_fit.csv"));

    // A different seed must change the tables.
    const fs::path d3 = fresh_dir("rerun_c");
    ExperimentConfig c3 = parse_config(base);
    c3.seed = 22;
    c3.output_dir = d3.string();
    REQUIRE(run_experiment(c3) == 0);
    CHECK(slurp(d1 / "norm_growth.csv") != slurp(d3 / "norm_growth.csv"));
}

TEST_CASE("region map emits the full grid") {
    const fs::path dir = fresh_dir("region_map");
    ExperimentConfig cfg = parse_config(R"({
        "command": "region-map",
        "seed": 1
    })");
    cfg.output_dir = dir.string();
    REQUIRE(run_experiment(cfg) == 0);
    const std::string table = slurp(dir / "region_map.csv");
    CHECK(line_count(table) == 2501);  // header + 50 x 50
    CHECK(table.find("decaying_interpolation") != std::string::npos);
    CHECK(table.find("unknown") != std::string::npos);
    CHECK(table.find("decaying_ridge") == std::string::npos);

    ExperimentConfig ridge = cfg;
    ridge.region_allow_ridge = true;
    ridge.region_alpha = 0.45;
    ridge.output_dir = (dir / "ridge").string();
    REQUIRE(run_experiment(ridge) == 0);
    CHECK(slurp(dir / "ridge" / "region_map.csv").find("decaying_ridge") !=
          std::string::npos);
}

TEST_CASE("jsonl format emits one object per row") {
    const fs::path dir = fresh_dir("jsonl");
    ExperimentConfig cfg = parse_config(R"({
        "command": "region-map",
        "seed": 1,
        "format": "jsonl",
        "region": {"grid_x": 5, "grid_y": 4}
    })");
    cfg.output_dir = dir.string();
    REQUIRE(run_experiment(cfg) == 0);
    const std::string table = slurp(dir / "region_map.jsonl");
    CHECK(line_count(table) == 20);
    std::istringstream rows(table);
    std::string line;
    while (std::getline(rows, line)) {
        const nlohmann::json row = nlohmann::json::parse(line);
        CHECK(row.contains("x_exp"));
        CHECK(row.contains("y_exp"));
        CHECK(row.at("region").is_string());
    }
}

TEST_CASE("rank deficiency surfaces as exit 3 with an error record") {
    const fs::path dir = fresh_dir("rank_fail");
    ExperimentConfig cfg = parse_config(R"({
        "command": "fit",
        "seed": 5,
        "data": [[1, 0, 1], [1, 0, -1]]
    })");
    cfg.output_dir = dir.string();
    CHECK(run_experiment(cfg) == 3);
    const nlohmann::json err = nlohmann::json::parse(slurp(dir / "error.json"));
    CHECK(err.at("error") == "rank_deficient");

    ExperimentConfig lenient = cfg;
    lenient.policy = RankPolicy::Lenient;
    lenient.output_dir = (dir / "lenient").string();
    CHECK(run_experiment(lenient) == 0);
    const std::string table = slurp(dir / "lenient" / "fit.csv");
    CHECK(table.find("skipped,0,1") != std::string::npos);
}

TEST_CASE("a table with no rows is a bare header") {
    const fs::path dir = fresh_dir("empty_table");
    {
        TableWriter t((dir / "t.csv").string(), {"n", "quantity", "value"},
                      false);
        t.close();
    }
    CHECK(slurp(dir / "t.csv") == "n,quantity,value\n");
    {
        TableWriter t((dir / "t.jsonl").string(), {"n", "quantity", "value"},
                      true);
        t.close();
    }
    CHECK(slurp(dir / "t.jsonl").empty());
}

TEST_CASE("data files parse comments, commas, and blank lines") {
    const fs::path dir = fresh_dir("data_file");
    const fs::path file = dir / "points.txt";
    {
        std::ofstream out(file);
        out << "# two separable points\n";
        out << "1.5, 0.0, 1\n";
        out << "\n";
        out << "-1.5 0.25 -1  # trailing comment\n";
    }
    const Dataset d = read_matrix_file(file.string());
    REQUIRE(d.size() == 2);
    CHECK(d.dim() == 2);
    CHECK(d.points[0] == Vec{1.5, 0.0});
    CHECK(d.points[1] == Vec{-1.5, 0.25});
    CHECK(d.labels == Vec{1.0, -1.0});

    ExperimentConfig cfg = parse_config(R"({"command": "online", "seed": 2})");
    cfg.data_path = file.string();
    cfg.output_dir = (dir / "run").string();
    REQUIRE(run_experiment(cfg) == 0);
    const std::string table = slurp(dir / "run" / "online.csv");
    CHECK(table.rfind("i,epsilon,s_sq,increment,norm_sq,mistake\n", 0) == 0);
    CHECK(line_count(table) == 3);

    const fs::path bad = dir / "bad.txt";
    {
        std::ofstream out(bad);
        out << "1 2 3\n1 oops 3\n";
    }
    CHECK_THROWS_AS(read_matrix_file(bad.string()), std::invalid_argument);
    const fs::path ragged = dir / "ragged.txt";
    {
        std::ofstream out(ragged);
        out << "1 2 3\n1 2\n";
    }
    CHECK_THROWS_AS(read_matrix_file(ragged.string()), std::invalid_argument);
}

TEST_CASE("sweep and separation through the driver") {
    const fs::path dir = fresh_dir("sweep");
    ExperimentConfig cfg = parse_config(R"({
        "command": "sweep",
        "seed": 31,
        "kernel": {"kind": "linear"},
        "model": {"kind": "gmm", "mu": 2.0, "psi": 2.0},
        "n_grid": [6, 10],
        "trials": 3,
        "test_size": 50
    })");
    cfg.output_dir = dir.string();
    REQUIRE(run_experiment(cfg) == 0);
    const std::string table = slurp(dir / "generalization.csv");
    CHECK(table.rfind("n,quantity,value,stderr\n", 0) == 0);
    CHECK(line_count(table) == 13);  // header + 6 quantities x 2 grid points

    ExperimentConfig sep = parse_config(R"({
        "command": "separation",
        "seed": 33,
        "n": 20,
        "model": {"kind": "gmm", "mu": 1.0, "psi": 2.0},
        "separation": {"eta_cap": 2.0}
    })");
    sep.output_dir = (dir / "sep").string();
    REQUIRE(run_experiment(sep) == 0);
    const std::string srows = slurp(dir / "sep" / "separation.csv");
    CHECK(line_count(srows) == 10);
    CHECK(srows.find("bayes_error,") != std::string::npos);
    CHECK(srows.find("separation_prob,") != std::string::npos);

    // redraws > 0 appends the label-redraw Monte Carlo rows
    sep.redraws = 50;
    sep.output_dir = (dir / "sep_mc").string();
    REQUIRE(run_experiment(sep) == 0);
    const std::string mrows = slurp(dir / "sep_mc" / "separation.csv");
    CHECK(line_count(mrows) == 13);
    CHECK(mrows.find("redraws,50\n") != std::string::npos);
    CHECK(mrows.find("norm_mc_mean,") != std::string::npos);
    CHECK(mrows.find("norm_mc_se,") != std::string::npos);
}

TEST_CASE("regret through the driver freezes both tables") {
    const fs::path dir = fresh_dir("regret_cmd");
    ExperimentConfig cfg = parse_config(R"({
        "command": "regret",
        "seed": 41,
        "kernel": {"kind": "gaussian", "bandwidth": 2.0},
        "model": {"kind": "gmm", "mu": 1.0, "psi": 2.0},
        "n": 12
    })");
    cfg.output_dir = dir.string();
    REQUIRE(run_experiment(cfg) == 0);
    const std::string main_table = slurp(dir / "regret.csv");
    CHECK(line_count(main_table) == 9);
    CHECK(main_table.find("upper_bound,") != std::string::npos);
    const std::string steps = slurp(dir / "regret_steps.csv");
    CHECK(line_count(steps) == 13);

    const nlohmann::json manifest =
        nlohmann::json::parse(slurp(dir / "manifest.json"));
    CHECK(manifest.at("outputs") ==
          nlohmann::json::array({"regret.csv", "regret_steps.csv"}));
}

TEST_SUITE_END();
