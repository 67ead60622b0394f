#include "mnic/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace mnic {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& msg) {
    throw std::invalid_argument("config: " + msg);
}

void check_keys(const json& obj, const std::string& where,
                const std::set<std::string>& allowed) {
    for (const auto& [key, _] : obj.items())
        if (!allowed.count(key))
            bad("unknown key '" + key + "' in " + where);
}

KernelKind kernel_kind_from(const std::string& s) {
    if (s == "linear") return KernelKind::Linear;
    if (s == "gaussian") return KernelKind::Gaussian;
    if (s == "polynomial") return KernelKind::Polynomial;
    if (s == "explicit") return KernelKind::ExplicitFeatures;
    bad("unknown kernel kind '" + s + "'");
}

std::string kernel_kind_name(KernelKind k) {
    switch (k) {
    case KernelKind::Linear: return "linear";
    case KernelKind::Gaussian: return "gaussian";
    case KernelKind::Polynomial: return "polynomial";
    case KernelKind::ExplicitFeatures: return "explicit";
    }
    return "linear";
}

KernelSpec parse_kernel(const json& j) {
    check_keys(j, "kernel",
               {"kind", "input_dim", "bandwidth", "degree", "offset", "feature_map"});
    KernelSpec k;
    k.kind = kernel_kind_from(j.value("kind", "linear"));
    k.input_dim = j.value("input_dim", 0u);
    k.bandwidth = j.value("bandwidth", 1.0);
    k.degree = j.value("degree", 2);
    k.offset = j.value("offset", 1.0);
    k.feature_map = j.value("feature_map", "identity");
    k.validate();
    return k;
}

json kernel_to_json(const KernelSpec& k) {
    json j;
    j["kind"] = kernel_kind_name(k.kind);
    if (k.input_dim) j["input_dim"] = k.input_dim;
    switch (k.kind) {
    case KernelKind::Gaussian: j["bandwidth"] = k.bandwidth; break;
    case KernelKind::Polynomial:
        j["degree"] = k.degree;
        j["offset"] = k.offset;
        break;
    case KernelKind::ExplicitFeatures: j["feature_map"] = k.feature_map; break;
    case KernelKind::Linear: break;
    }
    return j;
}

SpectrumSpec parse_spectrum(const json& j) {
    check_keys(j, "model.spectrum", {"kind", "value", "alpha", "values"});
    SpectrumSpec s;
    const std::string kind = j.value("kind", "flat");
    if (kind == "flat") {
        s.kind = SpectrumKind::Flat;
        s.value = j.value("value", 1.0);
    } else if (kind == "powerlaw") {
        s.kind = SpectrumKind::PowerLaw;
        s.alpha = j.value("alpha", 0.5);
    } else if (kind == "explicit") {
        s.kind = SpectrumKind::Explicit;
        if (!j.contains("values")) bad("explicit spectrum needs 'values'");
        s.values = j.at("values").get<Vec>();
    } else {
        bad("unknown spectrum kind '" + kind + "'");
    }
    return s;
}

json spectrum_to_json(const SpectrumSpec& s) {
    json j;
    switch (s.kind) {
    case SpectrumKind::Flat:
        j["kind"] = "flat";
        j["value"] = s.value;
        break;
    case SpectrumKind::PowerLaw:
        j["kind"] = "powerlaw";
        j["alpha"] = s.alpha;
        break;
    case SpectrumKind::Explicit:
        j["kind"] = "explicit";
        j["values"] = s.values;
        break;
    }
    return j;
}

GenerativeModelSpec parse_model(const json& j) {
    check_keys(j, "model",
               {"kind", "mu", "psi", "dim", "theta_star", "spectrum", "noise",
                "student_dof", "rotate"});
    GenerativeModelSpec m;
    const std::string kind = j.value("kind", "gmm");
    if (kind == "gmm") m.kind = ModelKind::GmmGaussian;
    else if (kind == "mixture") m.kind = ModelKind::GeneralMixture;
    else bad("unknown model kind '" + kind + "'");
    m.mu = j.value("mu", 1.0);
    m.psi = j.value("psi", 0.0);
    m.dim = j.value("dim", 0u);
    if (j.contains("theta_star")) {
        const json& th = j.at("theta_star");
        if (th.is_string()) {
            if (th.get<std::string>() != "e1")
                bad("theta_star must be 'e1' or a number array");
        } else {
            m.theta_star = th.get<Vec>();
        }
    }
    if (j.contains("spectrum")) m.spectrum = parse_spectrum(j.at("spectrum"));
    const std::string noise = j.value("noise", "gaussian");
    if (noise == "gaussian") m.noise = NoiseKind::Gaussian;
    else if (noise == "rademacher") m.noise = NoiseKind::Rademacher;
    else if (noise == "student_t") m.noise = NoiseKind::StudentT;
    else bad("unknown noise kind '" + noise + "'");
    m.student_dof = j.value("student_dof", 8.0);
    m.rotate = j.value("rotate", false);
    m.validate();
    return m;
}

json model_to_json(const GenerativeModelSpec& m) {
    json j;
    j["kind"] = m.kind == ModelKind::GmmGaussian ? "gmm" : "mixture";
    j["mu"] = m.mu;
    if (m.psi > 0.0) j["psi"] = m.psi;
    if (m.dim) j["dim"] = m.dim;
    if (m.theta_star.empty()) j["theta_star"] = "e1";
    else j["theta_star"] = m.theta_star;
    if (m.kind == ModelKind::GeneralMixture) {
        j["spectrum"] = spectrum_to_json(m.spectrum);
        switch (m.noise) {
        case NoiseKind::Gaussian: j["noise"] = "gaussian"; break;
        case NoiseKind::Rademacher: j["noise"] = "rademacher"; break;
        case NoiseKind::StudentT:
            j["noise"] = "student_t";
            j["student_dof"] = m.student_dof;
            break;
        }
        if (m.rotate) j["rotate"] = true;
    }
    return j;
}

Dataset parse_inline_data(const json& j) {
    if (!j.is_array()) bad("inline data must be an array of rows");
    Dataset d;
    for (const auto& row : j) {
        const Vec vals = row.get<Vec>();
        if (vals.size() < 2) bad("inline data rows need at least one feature and a label");
        d.points.emplace_back(vals.begin(), vals.end() - 1);
        d.labels.push_back(vals.back());
    }
    for (const Vec& x : d.points)
        if (x.size() != d.points.front().size())
            bad("inline data rows have inconsistent width");
    return d;
}

} // namespace

void ExperimentConfig::validate() const {
    static const std::set<std::string> commands = {
        "fit", "online", "regret", "simulate-gmm", "simulate-mixture",
        "region-map", "separation", "sweep"};
    if (!commands.count(command)) bad("unknown command '" + command + "'");
    if (!seed.has_value()) bad("a seed is required (config 'seed' or --seed)");
    if (!(lambda >= 0.0)) bad("lambda must be >= 0");
    if (!(tol_rank > 0.0)) bad("tol_rank must be positive");
    kernel.validate();
    if (model) model->validate();
    for (std::size_t i = 1; i < n_grid.size(); ++i)
        if (n_grid[i] <= n_grid[i - 1]) bad("n_grid must be strictly increasing");

    const bool needs_data = command == "fit" || command == "online";
    if (needs_data && !data && data_path.empty() && !model)
        bad(command + " needs inline data, a data file, or a model");
    if (command == "regret" && !data && data_path.empty() && !model)
        bad("regret needs inline data, a data file, or a model");
    if ((command == "simulate-gmm" || command == "simulate-mixture" ||
         command == "sweep") && !model)
        bad(command + " needs a model");
    if (command == "simulate-gmm" && model &&
        model->kind != ModelKind::GmmGaussian)
        bad("simulate-gmm needs a model of kind 'gmm'");
    if (command == "simulate-mixture" && model &&
        model->kind != ModelKind::GeneralMixture)
        bad("simulate-mixture needs a model of kind 'mixture'");
    if (command == "separation" && !model) bad("separation needs a model");
    if ((command == "simulate-gmm" || command == "simulate-mixture" ||
         command == "sweep") && n_grid.empty())
        bad(command + " needs a non-empty n_grid");
    if (command == "sweep" && test_size == 0)
        bad("sweep needs a positive test_size");
    if ((command == "separation" || command == "regret") && !data &&
        data_path.empty() && model && n == 0)
        bad(command + " needs n when sampling from a model");
    if (command == "region-map") {
        if (!(region_alpha > 0.0 && region_alpha < 0.5))
            bad("region alpha must lie in (0, 1/2)");
        if (!(region_x_min > 0.0 && region_x_max > region_x_min))
            bad("region x window is empty or nonpositive");
        if (!(region_y_min > 1.0 && region_y_max > region_y_min))
            bad("region y window must sit above 1");
        if (region_grid_x < 2 || region_grid_y < 2)
            bad("region grid needs at least 2 points per axis");
    }
}

ExperimentConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        bad(std::string("not valid JSON: ") + e.what());
    }
    if (!j.is_object()) bad("top level must be a JSON object");

    check_keys(j, "top level",
               {"command", "kernel", "lambda", "model", "n", "n_grid", "trials",
                "test_size", "redraws", "seed", "constants", "region",
                "separation", "tol_rank", "policy", "output_dir", "format",
                "threads", "data", "data_path"});

    ExperimentConfig cfg;
    if (!j.contains("command")) bad("missing 'command'");
    cfg.command = j.at("command").get<std::string>();
    if (j.contains("kernel")) cfg.kernel = parse_kernel(j.at("kernel"));
    cfg.lambda = j.value("lambda", 0.0);
    if (j.contains("model")) cfg.model = parse_model(j.at("model"));
    cfg.n = j.value("n", 0u);
    if (j.contains("n_grid"))
        cfg.n_grid = j.at("n_grid").get<std::vector<std::size_t>>();
    cfg.trials = j.value("trials", 1u);
    cfg.test_size = j.value("test_size", 0u);
    cfg.redraws = j.value("redraws", 0u);
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();

    if (j.contains("constants")) {
        const json& c = j.at("constants");
        check_keys(c, "constants", {"c1", "c2", "c3"});
        cfg.constants.c1 = c.value("c1", 1.0);
        cfg.constants.c2 = c.value("c2", 1.0);
        cfg.constants.c3 = c.value("c3", 1.0);
    }
    if (j.contains("region")) {
        const json& r = j.at("region");
        check_keys(r, "region",
                   {"alpha", "allow_ridge", "x_min", "x_max", "y_min", "y_max",
                    "grid_x", "grid_y"});
        cfg.region_alpha = r.value("alpha", cfg.region_alpha);
        cfg.region_allow_ridge = r.value("allow_ridge", false);
        cfg.region_x_min = r.value("x_min", cfg.region_x_min);
        cfg.region_x_max = r.value("x_max", cfg.region_x_max);
        cfg.region_y_min = r.value("y_min", cfg.region_y_min);
        cfg.region_y_max = r.value("y_max", cfg.region_y_max);
        cfg.region_grid_x = r.value("grid_x", cfg.region_grid_x);
        cfg.region_grid_y = r.value("grid_y", cfg.region_grid_y);
    }
    if (j.contains("separation")) {
        const json& s = j.at("separation");
        check_keys(s, "separation", {"eta_cap", "epsilon"});
        cfg.eta_cap = s.value("eta_cap", 0.0);
        cfg.epsilon = s.value("epsilon", 0.0);
    }
    cfg.tol_rank = j.value("tol_rank", 1e-10);
    const std::string policy = j.value("policy", "strict");
    if (policy == "strict") cfg.policy = RankPolicy::Strict;
    else if (policy == "lenient") cfg.policy = RankPolicy::Lenient;
    else bad("policy must be 'strict' or 'lenient'");
    cfg.output_dir = j.value("output_dir", ".");
    const std::string fmt = j.value("format", "csv");
    if (fmt == "csv") cfg.format = OutputFormat::Csv;
    else if (fmt == "jsonl") cfg.format = OutputFormat::Jsonl;
    else bad("format must be 'csv' or 'jsonl'");
    cfg.threads = j.value("threads", 0);
    if (j.contains("data")) cfg.data = parse_inline_data(j.at("data"));
    cfg.data_path = j.value("data_path", "");
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) bad("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["command"] = cfg.command;
    j["kernel"] = kernel_to_json(cfg.kernel);
    j["lambda"] = cfg.lambda;
    if (cfg.model) j["model"] = model_to_json(*cfg.model);
    if (cfg.n) j["n"] = cfg.n;
    if (!cfg.n_grid.empty()) j["n_grid"] = cfg.n_grid;
    j["trials"] = cfg.trials;
    if (cfg.test_size) j["test_size"] = cfg.test_size;
    if (cfg.redraws) j["redraws"] = cfg.redraws;
    if (cfg.seed) j["seed"] = *cfg.seed;
    j["constants"] = {{"c1", cfg.constants.c1},
                      {"c2", cfg.constants.c2},
                      {"c3", cfg.constants.c3}};
    if (cfg.command == "region-map") {
        j["region"] = {{"alpha", cfg.region_alpha},
                       {"allow_ridge", cfg.region_allow_ridge},
                       {"x_min", cfg.region_x_min},
                       {"x_max", cfg.region_x_max},
                       {"y_min", cfg.region_y_min},
                       {"y_max", cfg.region_y_max},
                       {"grid_x", cfg.region_grid_x},
                       {"grid_y", cfg.region_grid_y}};
    }
    if (cfg.command == "separation")
        j["separation"] = {{"eta_cap", cfg.eta_cap}, {"epsilon", cfg.epsilon}};
    j["tol_rank"] = cfg.tol_rank;
    j["policy"] = cfg.policy == RankPolicy::Strict ? "strict" : "lenient";
    j["output_dir"] = cfg.output_dir;
    j["format"] = cfg.format == OutputFormat::Csv ? "csv" : "jsonl";
    if (cfg.threads) j["threads"] = cfg.threads;
    if (!cfg.data_path.empty()) j["data_path"] = cfg.data_path;
    if (cfg.data) {
        json rows = json::array();
        for (std::size_t i = 0; i < cfg.data->size(); ++i) {
            json row = cfg.data->points[i];
            row.push_back(cfg.data->labels[i]);
            rows.push_back(row);
        }
        j["data"] = rows;
    }
    return j.dump(2);
}

Dataset read_matrix_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) bad("cannot open data file '" + path + "'");
    Dataset d;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        for (char& ch : line)
            if (ch == ',') ch = ' ';
        std::istringstream ls(line);
        Vec vals;
        std::string tok;
        while (ls >> tok) {
            if (tok[0] == '#') break;
            try {
                vals.push_back(std::stod(tok));
            } catch (const std::exception&) {
                bad("line " + std::to_string(lineno) + " of '" + path +
                    "': not a number: '" + tok + "'");
            }
        }
        if (vals.empty()) continue;
        if (vals.size() < 2)
            bad("line " + std::to_string(lineno) + " of '" + path +
                "': need at least one feature and a label");
        d.points.emplace_back(vals.begin(), vals.end() - 1);
        d.labels.push_back(vals.back());
    }
    for (const Vec& x : d.points)
        if (x.size() != d.points.front().size())
            bad("data file '" + path + "' has rows of different width");
    return d;
}

} // namespace mnic
