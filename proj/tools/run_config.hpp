#pragma once

#include "indist/dataset.hpp"
#include "indist/error.hpp"
#include "indist/synth.hpp"
#include "indist/weak_learners.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace indist::cli {

// A run is reproducible from its RunConfig alone: every artifact a command
// writes is a deterministic function of these fields.
struct RunConfig {
    // data
    std::string data_path;
    std::vector<std::string> features; // empty: every column not otherwise claimed
    std::string outcome_col = "y";
    std::string expert_col = "yhat";
    std::vector<std::string> feedback_cols;
    std::string id_col;
    bool error_on_missing = false;

    // split
    bool split_enabled = true;
    double train_fraction = 0.8;

    // partition
    std::string partition_kind = "boosted";
    std::vector<double> bin_edges; // empty: derived from the score range
    double alpha = 0.01;
    int min_cell = 50;
    int max_rounds = 100;
    std::string score_col;
    std::string score_rule_path;
    std::string metric = "euclidean";
    double radius = 1.0;

    // oracle
    int max_depth = 1;
    int min_leaf = 5;

    // bootstrap + testing
    int replicates = 1000;
    double level = 0.95;
    bool bonferroni_correct = true;
    int audit_probes = 20;

    std::string model = "linear";
    std::string eval_split = "test"; // test | train
    std::uint64_t seed = 0;
    std::string out = "out";

    // synth command
    SynthConfig synth;

    OracleSpec oracle() const { return {.max_depth = max_depth, .min_leaf = min_leaf}; }
};

inline void to_json(nlohmann::json& j, const RunConfig& c) {
    j = nlohmann::json::object();
    j["data"] = {{"path", c.data_path},         {"features", c.features},
                 {"outcome", c.outcome_col},    {"expert", c.expert_col},
                 {"feedback", c.feedback_cols}, {"id", c.id_col},
                 {"error_on_missing", c.error_on_missing}};
    j["split"] = {{"enabled", c.split_enabled}, {"train_fraction", c.train_fraction}};
    j["partition"] = {{"kind", c.partition_kind}, {"bin_edges", c.bin_edges},
                      {"alpha", c.alpha},         {"min_cell", c.min_cell},
                      {"max_rounds", c.max_rounds}, {"score_col", c.score_col},
                      {"score_rule", c.score_rule_path}, {"metric", c.metric},
                      {"radius", c.radius}};
    j["oracle"] = {{"max_depth", c.max_depth}, {"min_leaf", c.min_leaf}};
    j["bootstrap"] = {{"replicates", c.replicates}, {"level", c.level}};
    j["bonferroni"] = c.bonferroni_correct;
    j["audit_probes"] = c.audit_probes;
    j["model"] = c.model;
    j["eval_split"] = c.eval_split;
    j["seed"] = c.seed;
    nlohmann::json js;
    to_json(js, c.synth);
    j["synth"] = std::move(js);
}

inline void from_json(const nlohmann::json& j, RunConfig& c) {
    const auto get = [](const nlohmann::json& obj, const char* key, auto& into) {
        if (obj.contains(key)) into = obj.at(key).get<std::decay_t<decltype(into)>>();
    };
    if (j.contains("data")) {
        const auto& d = j["data"];
        get(d, "path", c.data_path);
        get(d, "features", c.features);
        get(d, "outcome", c.outcome_col);
        get(d, "expert", c.expert_col);
        get(d, "feedback", c.feedback_cols);
        get(d, "id", c.id_col);
        get(d, "error_on_missing", c.error_on_missing);
    }
    if (j.contains("split")) {
        get(j["split"], "enabled", c.split_enabled);
        get(j["split"], "train_fraction", c.train_fraction);
    }
    if (j.contains("partition")) {
        const auto& p = j["partition"];
        get(p, "kind", c.partition_kind);
        get(p, "bin_edges", c.bin_edges);
        get(p, "alpha", c.alpha);
        get(p, "min_cell", c.min_cell);
        get(p, "max_rounds", c.max_rounds);
        get(p, "score_col", c.score_col);
        get(p, "score_rule", c.score_rule_path);
        get(p, "metric", c.metric);
        get(p, "radius", c.radius);
    }
    if (j.contains("oracle")) {
        get(j["oracle"], "max_depth", c.max_depth);
        get(j["oracle"], "min_leaf", c.min_leaf);
    }
    if (j.contains("bootstrap")) {
        get(j["bootstrap"], "replicates", c.replicates);
        get(j["bootstrap"], "level", c.level);
    }
    get(j, "bonferroni", c.bonferroni_correct);
    get(j, "audit_probes", c.audit_probes);
    get(j, "model", c.model);
    get(j, "eval_split", c.eval_split);
    get(j, "seed", c.seed);
    if (j.contains("synth")) from_json(j["synth"], c.synth);
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError("bad config file " + path.string() + ": " + e.what());
    }
    RunConfig c;
    from_json(j, c);
    return c;
}

// FNV-1a over the canonical config dump; recorded in every manifest
inline std::string config_hash(const RunConfig& c) {
    nlohmann::json j;
    to_json(j, c);
    const std::string dump = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char ch : dump) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace indist::cli
