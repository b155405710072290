#pragma once

// JSON experiment configs.  Schema-validated: unknown keys are rejected and
// every run records the resolved config next to its outputs.

#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "potts/errors.hpp"
#include "potts/hash.hpp"
#include "potts/kernel.hpp"
#include "potts/mat.hpp"
#include "potts/parisi.hpp"

namespace potts {

using json = nlohmann::json;

inline Kernel parse_kernel(const json& j) {
    if (!j.is_object() || !j.contains("type")) throw config_invalid("kernel needs a type");
    std::string type = j.at("type").get<std::string>();
    if (type == "block") {
        for (auto& [k, v] : j.items())
            if (k != "type" && k != "boundaries" && k != "values")
                throw config_invalid("unknown kernel key: " + k);
        auto boundaries = j.at("boundaries").get<std::vector<double>>();
        auto rows = j.at("values").get<std::vector<std::vector<double>>>();
        int m = int(rows.size());
        Mat vals(m);
        for (int i = 0; i < m; ++i) {
            if (int(rows[i].size()) != m) throw config_invalid("kernel values must be square");
            for (int k = 0; k < m; ++k) vals(i, k) = rows[i][k];
        }
        return block_kernel_new(boundaries, vals);
    }
    if (type == "dubins") {
        for (auto& [k, v] : j.items())
            if (k != "type") throw config_invalid("unknown kernel key: " + k);
        return dubins_kernel();
    }
    if (type == "rank1") {
        for (auto& [k, v] : j.items())
            if (k != "type" && k != "psi" && k != "knots" && k != "vals" && k != "resolution")
                throw config_invalid("unknown kernel key: " + k);
        if (j.value("psi", std::string("piecewise")) != "piecewise")
            throw config_invalid("rank1 kernel supports psi=piecewise");
        return rank1_piecewise(j.at("knots").get<std::vector<double>>(),
                               j.at("vals").get<std::vector<double>>(), j.value("resolution", 64));
    }
    throw config_invalid("unknown kernel type: " + type);
}

inline ModelSpec parse_model(const json& j) {
    if (!j.is_object()) throw config_invalid("model must be an object");
    for (auto& [k, v] : j.items())
        if (k != "kappa" && k != "rho" && k != "delta2" && k != "beta")
            throw config_invalid("unknown model key: " + k);
    ModelSpec m;
    m.kappa = j.at("kappa").get<int>();
    m.rho = j.at("rho").get<std::vector<double>>();
    auto rows = j.at("delta2").get<std::vector<std::vector<double>>>();
    m.delta2 = Mat(int(rows.size()));
    for (size_t s = 0; s < rows.size(); ++s) {
        if (rows[s].size() != rows.size()) throw config_invalid("delta2 must be square");
        for (size_t t = 0; t < rows.size(); ++t) m.delta2(int(s), int(t)) = rows[s][t];
    }
    m.beta = j.value("beta", 1.0);
    m.validate();
    return m;
}

inline std::vector<std::vector<double>> parse_proportions(const json& j) {
    auto d = j.get<std::vector<std::vector<double>>>();
    for (const auto& row : d) {
        double sum = 0.0;
        for (double v : row) {
            if (v < 0.0) throw config_invalid("proportions must be nonnegative");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-9) throw config_invalid("each proportion row must sum to 1");
    }
    return d;
}

struct ExperimentConfig {
    std::string task;
    uint64_t seed = 1;
    std::string out_dir = ".";
    json raw;

    std::string hash() const { return content_hash(raw.dump()); }
};

namespace detail {

inline const std::set<std::string>& allowed_keys(const std::string& task) {
    static const std::set<std::string> common = {"task", "seed", "out"};
    static const std::set<std::string> by_task[] = {
        /*sample-graph*/ {"kernel", "n", "c"},
        /*maxcut*/ {"graph_file", "kappa", "solver", "restarts", "budget"},
        /*free-energy*/ {"model", "n", "replicas", "d", "epsilon", "budget"},
        /*groundstate*/ {"model", "d", "beta_grid", "r", "restarts", "nodes"},
        /*parisi-eval*/ {"model", "d", "params", "nodes", "samples"},
        /*parisi-min*/ {"model", "d", "r", "restarts", "nodes", "max_iter"},
        /*predict*/ {"kernel", "c", "kappa", "grid_mesh", "r", "beta_grid", "restarts", "nodes"},
        /*verify*/ {"suite"},
        /*compare*/
        {"kernel", "kappa", "n", "c_list", "replicas", "restarts", "grid_mesh", "r", "beta_grid",
         "nodes"},
    };
    static const std::vector<std::string> names = {"sample-graph", "maxcut",     "free-energy",
                                                   "groundstate",  "parisi-eval", "parisi-min",
                                                   "predict",      "verify",      "compare"};
    for (size_t i = 0; i < names.size(); ++i) {
        if (names[i] == task) {
            static std::set<std::string> merged[9];
            if (merged[i].empty()) {
                merged[i] = common;
                merged[i].insert(by_task[i].begin(), by_task[i].end());
            }
            return merged[i];
        }
    }
    throw config_invalid("unknown task: " + task);
}

}  // namespace detail

inline ExperimentConfig parse_config(const json& j) {
    if (!j.is_object() || !j.contains("task")) throw config_invalid("config needs a task");
    ExperimentConfig cfg;
    cfg.task = j.at("task").get<std::string>();
    const auto& allowed = detail::allowed_keys(cfg.task);
    for (auto& [k, v] : j.items())
        if (!allowed.count(k)) throw config_invalid("unknown config key: " + k);
    cfg.seed = j.value("seed", uint64_t(1));
    cfg.out_dir = j.value("out", std::string("."));
    cfg.raw = j;
    if (!cfg.raw.contains("seed")) cfg.raw["seed"] = cfg.seed;
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw config_invalid("cannot open config: " + path);
    json j;
    try {
        f >> j;
    } catch (const std::exception& e) {
        throw config_invalid(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(j);
}

}  // namespace potts
