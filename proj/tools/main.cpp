// Command-line front end: load -> partition -> audit -> test -> fit ->
// policies -> report. Every artifact is a deterministic function of the
// run configuration; reports are TSV tables plus JSON summaries.

#include "run_config.hpp"

#include "indist/collaborate.hpp"
#include "indist/dataset.hpp"
#include "indist/error.hpp"
#include "indist/partition.hpp"
#include "indist/policy.hpp"
#include "indist/rng.hpp"
#include "indist/stats.hpp"
#include "indist/synth.hpp"
#include "indist/util.hpp"
#include "indist/weak_learners.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace indist;
using cli::RunConfig;

namespace {

constexpr const char* na = "NA";

std::string fmt(double v) { return format_double(v); }
std::string fmt(std::optional<double> v) { return v ? format_double(*v) : std::string(na); }

class ArtifactWriter {
public:
    ArtifactWriter(const RunConfig& cfg, std::string command,
                   std::string manifest_name = "manifest.json")
        : cfg_(cfg), command_(std::move(command)), manifest_name_(std::move(manifest_name)),
          dir_(cfg.out) {
        fs::create_directories(dir_);
    }

    void write_text(const std::string& name, const std::string& content) {
        std::ofstream out(dir_ / name, std::ios::binary);
        if (!out) throw ConfigError("cannot write artifact: " + (dir_ / name).string());
        out << content;
        names_.push_back(name);
    }

    void write_json(const std::string& name, const nlohmann::json& j) {
        write_text(name, j.dump(2) + "\n");
    }

    void write_tsv(const std::string& name, const std::vector<std::string>& header,
                   const std::vector<std::vector<std::string>>& rows) {
        std::ostringstream out;
        for (std::size_t i = 0; i < header.size(); ++i)
            out << (i ? "\t" : "") << header[i];
        out << "\n";
        for (const auto& row : rows) {
            for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "\t" : "") << row[i];
            out << "\n";
        }
        write_text(name, out.str());
    }

    void finish(const nlohmann::json& notes = nlohmann::json::object()) {
        nlohmann::json manifest;
        manifest["command"] = command_;
        nlohmann::json jc;
        to_json(jc, cfg_);
        manifest["config"] = std::move(jc);
        manifest["config_hash"] = cli::config_hash(cfg_);
        manifest["artifacts"] = names_;
        manifest["notes"] = notes;
        write_text(manifest_name_, manifest.dump(2) + "\n");
        std::cout << "wrote " << names_.size() << " artifacts to " << dir_.string() << "\n";
    }

private:
    const RunConfig& cfg_;
    std::string command_;
    std::string manifest_name_;
    fs::path dir_;
    std::vector<std::string> names_;
};

std::vector<std::string> read_header(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open dataset file: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("empty file: " + path.string());
    std::vector<std::string> cols;
    std::string cur;
    for (const char c : line) {
        if (c == ',') {
            cols.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    cols.push_back(cur);
    return cols;
}

ColumnSchema schema_from_config(const RunConfig& cfg) {
    ColumnSchema s;
    s.feature_cols = cfg.features;
    s.outcome_col = cfg.outcome_col;
    s.expert_col = cfg.expert_col;
    s.feedback_cols = cfg.feedback_cols;
    s.id_col = cfg.id_col;
    s.error_on_missing = cfg.error_on_missing;
    if (s.feature_cols.empty()) {
        // every column not claimed by another role, in header order
        for (const auto& col : read_header(cfg.data_path)) {
            if (col == s.outcome_col || col == s.expert_col || col == s.id_col) continue;
            if (std::find(s.feedback_cols.begin(), s.feedback_cols.end(), col) !=
                s.feedback_cols.end())
                continue;
            if (col == "row_id") continue;
            s.feature_cols.push_back(col);
        }
    }
    return s;
}

struct Pipeline {
    RunConfig cfg;
    Dataset full;
    Dataset train;
    Dataset test;
    LoadReport load_report;

    explicit Pipeline(RunConfig c) : cfg(std::move(c)) {
        if (cfg.data_path.empty()) throw ConfigError("no dataset path configured");
        full = load_dataset(cfg.data_path, schema_from_config(cfg), &load_report);
        if (cfg.split_enabled) {
            auto [tr, te] = split_dataset(full, {cfg.train_fraction, cfg.seed});
            train = std::move(tr);
            test = std::move(te);
        } else {
            train = full;
        }
    }

    const Dataset& eval_set() const {
        if (cfg.eval_split == "train") return train;
        if (cfg.eval_split != "test") throw ConfigError("eval_split must be 'train' or 'test'");
        if (test.n_rows == 0)
            throw ConfigError("eval split 'test' is empty; disable the split or lower the fraction");
        return test;
    }

    std::vector<double> column_edges(std::size_t col) const {
        double lo = full.row(0)[col];
        double hi = lo;
        for (std::size_t i = 0; i < full.n_rows; ++i) {
            lo = std::min(lo, full.row(i)[col]);
            hi = std::max(hi, full.row(i)[col]);
        }
        std::vector<double> edges;
        for (double e = std::floor(lo); e <= std::floor(hi) + 1.0; e += 1.0) edges.push_back(e);
        return edges;
    }

    struct Built {
        Partition partition;
        std::optional<BoostResult> boost;
    };

    Built build_partition() const {
        const auto kind = partition_kind_from_string(cfg.partition_kind);
        Built built;
        switch (kind) {
            case PartitionKind::observational:
                built.partition = observational_partition(train);
                break;
            case PartitionKind::epsilon_net: {
                const Metric m = cfg.metric == "hamming" ? Metric::hamming : Metric::euclidean;
                if (cfg.metric != "hamming" && cfg.metric != "euclidean")
                    throw ConfigError("metric must be 'euclidean' or 'hamming'");
                built.partition = epsilon_net_partition(train, m, cfg.radius);
                break;
            }
            case PartitionKind::level_set: {
                if (!cfg.score_rule_path.empty()) {
                    const auto rule = load_score_rule(cfg.score_rule_path);
                    std::vector<double> edges = cfg.bin_edges;
                    if (edges.empty())
                        for (int e = rule.min_score; e <= rule.max_score + 1; ++e)
                            edges.push_back(static_cast<double>(e));
                    built.partition = level_set_partition_rule(train, rule, edges);
                } else if (!cfg.score_col.empty()) {
                    const std::size_t col = train.feature_index(cfg.score_col);
                    const auto edges = cfg.bin_edges.empty() ? column_edges(col) : cfg.bin_edges;
                    built.partition = level_set_partition_column(train, col, edges);
                } else {
                    throw ConfigError("level_set partition needs score_col or score_rule");
                }
                break;
            }
            case PartitionKind::boosted: {
                const auto edges = cfg.bin_edges.empty() ? default_unit_edges() : cfg.bin_edges;
                auto res = boost_multicalibrated(train, cfg.oracle(), cfg.alpha, edges,
                                                 cfg.min_cell, cfg.max_rounds);
                built.boost = std::move(res);
                built.partition = built.boost->partition;
                break;
            }
        }
        return built;
    }
};

nlohmann::json interval_json(const IntervalEstimate& e) {
    return {{"point", e.point}, {"lo", e.lo},   {"hi", e.hi},
            {"level", e.level}, {"replicates", e.replicates}, {"missing", e.missing}};
}

void write_audit(ArtifactWriter& w, const AuditReport& report, const Partition& p) {
    nlohmann::json j;
    to_json(j, report);
    w.write_json("audit.json", j);

    std::vector<std::vector<std::string>> rows;
    for (const auto& c : report.cells)
        rows.push_back({std::to_string(c.cell), std::to_string(c.size), fmt(c.alpha_hat),
                        fmt(c.var_bound), fmt(c.mse_gap), c.exact ? "yes" : "no",
                        c.small ? "yes" : "no", c.best_probe, p.cells[c.cell].rule});
    w.write_tsv("audit.tsv",
                {"cell", "size", "alpha_hat", "var_bound", "mse_gap", "exact", "small",
                 "best_probe", "rule"},
                rows);
}

nlohmann::json split_ids_json(const Pipeline& pipe) {
    return {{"train_ids", pipe.train.row_ids}, {"test_ids", pipe.test.row_ids}};
}

// ---------------------------------------------------------------- commands

int cmd_synth(const RunConfig& cfg) {
    const auto result = generate(cfg.synth);
    ArtifactWriter w(cfg, "synth");

    const auto schema = saved_schema(result.data);
    fs::create_directories(cfg.out);
    save_dataset(result.data, fs::path(cfg.out) / "synth.csv", schema);
    // registered by name so the manifest lists it alongside the sidecar
    {
        std::ifstream in(fs::path(cfg.out) / "synth.csv", std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        w.write_text("synth.csv", ss.str());
    }
    nlohmann::json jt;
    to_json(jt, result.truth);
    w.write_json("synth_truth.json", jt);

    w.finish({{"rows", result.data.n_rows},
              {"informed_cell", result.truth.informed_cell},
              {"planted_cells", result.truth.planted.cell_count()}});
    return 0;
}

int cmd_partition(const RunConfig& cfg) {
    const Pipeline pipe(cfg);
    const auto built = pipe.build_partition();
    const auto& p = built.partition;
    const auto audit =
        audit_partition(p, pipe.train, cfg.oracle(), cfg.audit_probes, derive_seed(cfg.seed, "audit"));

    ArtifactWriter w(cfg, "partition");
    nlohmann::json jp;
    to_json(jp, p);
    w.write_json("partition.json", jp);
    if (built.boost) {
        const auto& b = *built.boost;
        w.write_json("boost.json", {{"converged", b.converged},
                                    {"rounds", b.rounds},
                                    {"round_mse", b.round_mse},
                                    {"updates", b.update_improvements.size()},
                                    {"base", b.predictor.base}});
        if (!b.converged)
            std::cout << "note: boosting hit max_rounds without converging\n";
    }
    write_audit(w, audit, p);
    w.write_json("split.json", split_ids_json(pipe));
    w.finish({{"cells", p.cell_count()},
              {"train_rows", pipe.train.n_rows},
              {"test_rows", pipe.test.n_rows},
              {"rows_dropped", pipe.load_report.rows_dropped}});
    return 0;
}

int cmd_audit(const RunConfig& cfg, const std::string& partition_path) {
    const Pipeline pipe(cfg);
    const fs::path path = partition_path.empty() ? fs::path(cfg.out) / "partition.json"
                                                 : fs::path(partition_path);
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open partition artifact: " + path.string());
    nlohmann::json j;
    in >> j;
    Partition p;
    from_json(j, p);
    if (p.n_train_rows != pipe.train.n_rows)
        throw ConfigError("partition artifact does not match this config's training split");

    const auto audit =
        audit_partition(p, pipe.train, cfg.oracle(), cfg.audit_probes, derive_seed(cfg.seed, "audit"));
    ArtifactWriter w(cfg, "audit");
    write_audit(w, audit, p);
    w.finish({{"cells", p.cell_count()}});
    return 0;
}

int cmd_test_expert(const RunConfig& cfg) {
    const Pipeline pipe(cfg);
    const auto built = pipe.build_partition();
    const auto& p = built.partition;
    const auto& eval = pipe.eval_set();
    const auto cells = p.assign_rows(eval);

    const std::size_t K = p.cell_count();
    const double alpha_sig = 1.0 - cfg.level;
    const double alpha_adj = cfg.bonferroni_correct ? bonferroni(alpha_sig, K) : alpha_sig;
    const double ci_level = 1.0 - alpha_adj;

    std::vector<std::vector<std::size_t>> groups(K + 1);
    for (std::size_t i = 0; i < eval.n_rows; ++i) groups[cells[i]].push_back(i);

    std::vector<std::vector<std::string>> rows;
    nlohmann::json jcells = nlohmann::json::array();
    std::size_t significant = 0;
    for (std::size_t k = 0; k < K; ++k) {
        const auto& idx = groups[k];
        if (idx.size() < 2) {
            rows.push_back({std::to_string(k), std::to_string(idx.size()), na, na, na, "no", na,
                            na, na, "no", p.cells[k].rule});
            jcells.push_back({{"cell", k}, {"n", idx.size()}});
            continue;
        }
        std::vector<double> ys;
        std::vector<double> yhats;
        for (const std::size_t r : idx) {
            ys.push_back(eval.outcome[r]);
            yhats.push_back(eval.expert[r]);
        }
        const auto mcc_stat = [&](std::span<const std::size_t> s) -> std::optional<double> {
            std::vector<double> a(s.size());
            std::vector<double> b(s.size());
            for (std::size_t i = 0; i < s.size(); ++i) {
                a[i] = yhats[s[i]];
                b[i] = ys[s[i]];
            }
            return mcc(a, b); // degenerate resamples count as 0 by convention
        };
        const auto cov_stat = [&](std::span<const std::size_t> s) -> std::optional<double> {
            std::vector<double> a(s.size());
            std::vector<double> b(s.size());
            for (std::size_t i = 0; i < s.size(); ++i) {
                a[i] = ys[s[i]];
                b[i] = yhats[s[i]];
            }
            return covariance(a, b);
        };
        const auto mcc_ci = bootstrap_ci(mcc_stat, idx.size(), cfg.replicates, ci_level,
                                         derive_seed(cfg.seed, "expert_mcc", k));
        const auto cov_ci = bootstrap_ci(cov_stat, idx.size(), cfg.replicates, ci_level,
                                         derive_seed(cfg.seed, "expert_cov", k));
        const bool mcc_sig = mcc_ci.lo > 0.0 || mcc_ci.hi < 0.0;
        const bool cov_sig = cov_ci.lo > 0.0 || cov_ci.hi < 0.0;
        significant += mcc_sig ? 1 : 0;

        rows.push_back({std::to_string(k), std::to_string(idx.size()), fmt(mcc_ci.point),
                        fmt(mcc_ci.lo), fmt(mcc_ci.hi), mcc_sig ? "yes" : "no", fmt(cov_ci.point),
                        fmt(cov_ci.lo), fmt(cov_ci.hi), cov_sig ? "yes" : "no", p.cells[k].rule});
        jcells.push_back({{"cell", k},
                          {"n", idx.size()},
                          {"mcc", interval_json(mcc_ci)},
                          {"mcc_significant", mcc_sig},
                          {"cov", interval_json(cov_ci)},
                          {"cov_significant", cov_sig}});
    }

    ArtifactWriter w(cfg, "test-expert");
    w.write_tsv("expert_cells.tsv",
                {"cell", "n", "mcc", "mcc_lo", "mcc_hi", "mcc_significant", "cov", "cov_lo",
                 "cov_hi", "cov_significant", "rule"},
                rows);
    w.write_json("expert_cells.json",
                 {{"cells", jcells},
                  {"level", cfg.level},
                  {"significance_level", alpha_sig},
                  {"adjusted_significance_level", alpha_adj},
                  {"bonferroni", cfg.bonferroni_correct},
                  {"replicates", cfg.replicates},
                  {"eval_split", cfg.eval_split},
                  {"reserved_rows", groups[K].size()}});
    w.finish({{"cells", K}, {"significant_cells", significant}});
    return 0;
}

std::vector<std::vector<std::string>> theorem_rows(const TheoremCheck& check) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& c : check.cells)
        rows.push_back({std::to_string(c.cell), std::to_string(c.n), fmt(c.mse_model), fmt(c.cov),
                        fmt(c.lhs), fmt(c.mse_comparator), fmt(c.alpha_hat), fmt(c.rhs),
                        fmt(c.slack), c.n == 0 ? na : (c.holds ? "yes" : "no")});
    return rows;
}

int cmd_fit(const RunConfig& cfg) {
    const Pipeline pipe(cfg);
    const auto built = pipe.build_partition();
    const auto& p = built.partition;
    const auto oracle = cfg.oracle();
    const auto audit =
        audit_partition(p, pipe.train, oracle, cfg.audit_probes, derive_seed(cfg.seed, "audit"));

    const auto kind = model_kind_from_string(cfg.model);
    const auto models = fit_subset_models(p, pipe.train, kind);
    const auto mean_models = fit_subset_models(p, pipe.train, ModelKind::mean_only);
    const auto linear_models =
        kind == ModelKind::linear ? models : fit_subset_models(p, pipe.train, ModelKind::linear);

    // the strongest single in-class comparator: the oracle fit on all of train
    const auto comparator = fit_tree(pipe.train.features_view(), pipe.train.outcome, oracle);
    const auto check_train =
        theorem1_check(linear_models, p, pipe.train, comparator, audit, 1e-9);
    const auto certificates = theorem2_certificates(p, pipe.train, cfg.alpha, cfg.replicates,
                                                    cfg.level, derive_seed(cfg.seed, "certificates"));

    ArtifactWriter w(cfg, "fit");
    nlohmann::json jm;
    to_json(jm, models);
    w.write_json("models.json", jm);

    const std::vector<std::string> theorem_header{"cell", "n",         "mse_model", "cov",  "lhs",
                                                  "mse_comparator", "alpha_hat", "rhs",  "slack",
                                                  "holds"};
    w.write_tsv("theorem1_train.tsv", theorem_header, theorem_rows(check_train));
    if (pipe.test.n_rows > 0) {
        const auto check_test =
            theorem1_check(linear_models, p, pipe.test, comparator, audit, 1e-9);
        w.write_tsv("theorem1_test.tsv", theorem_header, theorem_rows(check_test));
    }

    std::vector<std::vector<std::string>> cert_rows;
    std::size_t fired = 0;
    for (const auto& c : certificates) {
        fired += c.fired ? 1 : 0;
        cert_rows.push_back({std::to_string(c.cell), std::to_string(c.size), fmt(c.cov_abs),
                             fmt(c.interval.lo), fmt(c.interval.hi), fmt(c.threshold),
                             c.fired ? "yes" : "no"});
    }
    w.write_tsv("certificates.tsv",
                {"cell", "size", "abs_cov", "lo", "hi", "threshold", "fired"}, cert_rows);

    // out-of-sample squared error: collaborative model vs per-cell mean
    nlohmann::json mse_summary;
    {
        const auto& eval = pipe.eval_set();
        const auto cells = p.assign_rows(eval);
        const auto model_mse_stat = [&](const SubsetModels& m) {
            return [&, cells](std::span<const std::size_t> idx) -> std::optional<double> {
                double s = 0.0;
                for (const std::size_t i : idx) {
                    const double pred = m.predict(cells[i], eval.expert[i]);
                    s += (pred - eval.outcome[i]) * (pred - eval.outcome[i]);
                }
                return s / static_cast<double>(idx.size());
            };
        };
        const auto collab_ci = bootstrap_ci(model_mse_stat(models), eval.n_rows, cfg.replicates,
                                            cfg.level, derive_seed(cfg.seed, "mse_collab"));
        const auto mean_ci = bootstrap_ci(model_mse_stat(mean_models), eval.n_rows, cfg.replicates,
                                          cfg.level, derive_seed(cfg.seed, "mse_mean"));
        mse_summary = {{"eval_split", cfg.eval_split},
                       {"n", eval.n_rows},
                       {"model", cfg.model},
                       {"collaborative_mse", interval_json(collab_ci)},
                       {"mean_baseline_mse", interval_json(mean_ci)}};
        w.write_json("mse_summary.json", mse_summary);
    }

    if (pipe.train.n_feedback > 0) {
        std::vector<std::vector<std::string>> fb_rows;
        for (std::size_t col = 0; col < pipe.train.n_feedback; ++col) {
            for (std::size_t k = 0; k < p.cell_count(); ++k) {
                const auto& rows = p.cells[k].train_rows;
                if (rows.size() < 2) continue;
                std::vector<double> gh;
                std::vector<double> ys;
                for (const std::size_t r : rows) {
                    const double g = pipe.train.feedback_row(r)[col];
                    if (g < 0.0 || g > 1.0)
                        throw ConfigError("feedback column '" + pipe.train.feedback_names[col] +
                                          "' has values outside [0,1]");
                    gh.push_back(g);
                    ys.push_back(pipe.train.outcome[r]);
                }
                const auto calibrated = calibrate_feedback(gh, ys);
                double before = 0.0;
                double after = 0.0;
                for (std::size_t i = 0; i < gh.size(); ++i) {
                    before += (gh[i] - ys[i]) * (gh[i] - ys[i]);
                    after += (calibrated.values[i] - ys[i]) * (calibrated.values[i] - ys[i]);
                }
                before /= static_cast<double>(gh.size());
                after /= static_cast<double>(gh.size());
                fb_rows.push_back({pipe.train.feedback_names[col], std::to_string(k),
                                   std::to_string(rows.size()), fmt(calibrated.gamma),
                                   fmt(calibrated.beta), fmt(before), fmt(after)});
            }
        }
        w.write_tsv("feedback_calibration.tsv",
                    {"column", "cell", "n", "gamma", "beta", "mse_before", "mse_after"}, fb_rows);
    }

    w.finish({{"cells", p.cell_count()},
              {"theorem1_train_all_hold", check_train.all_hold},
              {"certificates_fired", fired}});
    return 0;
}

int cmd_policies(const RunConfig& cfg) {
    const Pipeline pipe(cfg);
    const auto built = pipe.build_partition();
    const auto& p = built.partition;
    const auto& eval = pipe.eval_set();

    const auto policies = enumerate_policies(p.cell_count());
    const PolicyEvaluator evaluator(p, eval);
    std::vector<std::pair<Policy, PolicyEval>> evals;
    evals.reserve(policies.size());
    for (const auto& pol : policies) evals.emplace_back(pol, evaluator.evaluate(pol));
    const auto frontier = pareto_frontier(evals);

    const auto to_rows = [](const std::vector<std::pair<Policy, PolicyEval>>& list) {
        std::vector<std::vector<std::string>> rows;
        for (const auto& [pol, ev] : list)
            rows.push_back({pol.to_string(), fmt(ev.tpr), fmt(ev.fpr), fmt(ev.automation)});
        return rows;
    };

    ArtifactWriter w(cfg, "policies");
    w.write_tsv("policies_all.tsv", {"policy", "tpr", "fpr", "automation"}, to_rows(evals));
    w.write_tsv("policies_frontier.tsv", {"policy", "tpr", "fpr", "automation"},
                to_rows(frontier));
    w.write_json("policies_summary.json", {{"cells", p.cell_count()},
                                           {"evaluated", evals.size()},
                                           {"frontier", frontier.size()},
                                           {"eval_split", cfg.eval_split},
                                           {"eval_rows", eval.n_rows}});
    w.finish({{"evaluated", evals.size()}, {"frontier", frontier.size()}});
    return 0;
}

int cmd_report(const RunConfig& flags_cfg, const std::string& thresholds_flag) {
    const fs::path dir(flags_cfg.out);
    std::ifstream min(dir / "manifest.json");
    if (!min) throw ConfigError("no manifest.json under " + dir.string() + "; run a command first");
    nlohmann::json manifest;
    min >> manifest;
    RunConfig cfg;
    from_json(manifest.at("config"), cfg);
    cfg.out = flags_cfg.out;
    if (!flags_cfg.score_rule_path.empty()) cfg.score_rule_path = flags_cfg.score_rule_path;

    std::ostringstream out;
    out << "run summary\n===========\n";
    out << "command: " << manifest.at("command").get<std::string>() << "\n";
    out << "config hash: " << manifest.at("config_hash").get<std::string>() << "\n\n";

    const auto maybe_append_file = [&](const std::string& name, const std::string& title) {
        std::ifstream in(dir / name);
        if (!in) return;
        out << title << "\n";
        out << std::string(title.size(), '-') << "\n";
        out << in.rdbuf() << "\n";
    };
    maybe_append_file("audit.tsv", "per-cell audit");
    maybe_append_file("expert_cells.tsv", "expert signal by cell");
    maybe_append_file("certificates.tsv", "covariance certificates");
    maybe_append_file("theorem1_train.tsv", "per-subset squared-error comparison (train)");
    maybe_append_file("theorem1_test.tsv", "per-subset squared-error comparison (test)");
    maybe_append_file("policies_frontier.tsv", "pareto frontier");

    ArtifactWriter w(cfg, "report", "report_manifest.json");

    // decision-rule comparison table when a score rule is configured
    if (!cfg.score_rule_path.empty() && !cfg.data_path.empty()) {
        const Pipeline pipe(cfg);
        const auto& eval = pipe.eval_set();
        const auto rule = load_score_rule(cfg.score_rule_path);
        const auto scores = score_rule(eval, rule);

        std::vector<int> thresholds;
        std::stringstream ts(thresholds_flag);
        std::string tok;
        while (std::getline(ts, tok, ',')) thresholds.push_back(std::stoi(tok));

        const auto metrics_row = [&](const std::string& name, const std::vector<double>& decisions) {
            const auto m = classification_metrics(decisions, eval.outcome);
            const auto n = eval.n_rows;
            std::vector<std::string> row{name, fmt(m.fraction_positive),
                                         fmt(two_se(m.fraction_positive, n)), fmt(m.accuracy),
                                         fmt(two_se(m.accuracy, n))};
            if (m.sensitivity) {
                row.push_back(fmt(*m.sensitivity));
                row.push_back(fmt(two_se(*m.sensitivity, m.counts.tp + m.counts.fn)));
            } else {
                row.insert(row.end(), {na, na});
            }
            if (m.specificity) {
                row.push_back(fmt(*m.specificity));
                row.push_back(fmt(two_se(*m.specificity, m.counts.tn + m.counts.fp)));
            } else {
                row.insert(row.end(), {na, na});
            }
            return row;
        };

        std::vector<std::vector<std::string>> rows;
        rows.push_back(metrics_row("expert", eval.expert));
        for (const int t : thresholds) {
            std::vector<double> decisions(eval.n_rows);
            for (std::size_t i = 0; i < eval.n_rows; ++i)
                decisions[i] = scores[i] > t ? 1.0 : 0.0;
            rows.push_back(metrics_row("admit score > " + std::to_string(t), decisions));
        }
        w.write_tsv("decision_rules.tsv",
                    {"rule", "fraction_admitted", "fraction_2se", "accuracy", "accuracy_2se",
                     "sensitivity", "sensitivity_2se", "specificity", "specificity_2se"},
                    rows);
        out << "decision rule comparison written to decision_rules.tsv\n";
    }

    w.write_text("summary.txt", out.str());
    w.finish();
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"algorithmically indistinguishable partitions and expert-signal testing"};
    app.require_subcommand(1);

    // config file first, flags override
    RunConfig cfg;
    for (int i = 1; i + 1 < argc; ++i)
        if (std::string(argv[i]) == "--config") cfg = cli::load_run_config(argv[i + 1]);

    std::string config_path;
    std::string partition_path;
    std::string thresholds = "0,1,2,7";
    std::string cards;
    std::string structure;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON run configuration");
        sub->add_option("--data", cfg.data_path, "dataset CSV path");
        sub->add_option("--features", cfg.features, "feature columns")->delimiter(',');
        sub->add_option("--outcome", cfg.outcome_col, "outcome column");
        sub->add_option("--expert", cfg.expert_col, "expert prediction column");
        sub->add_option("--feedback", cfg.feedback_cols, "feedback columns")->delimiter(',');
        sub->add_option("--id", cfg.id_col, "row id column");
        sub->add_option("--train-fraction", cfg.train_fraction, "train split fraction");
        sub->add_flag("--no-split{false}", cfg.split_enabled, "use all rows for training");
        sub->add_option("--partition-kind", cfg.partition_kind,
                        "observational | level_set | epsilon_net | boosted");
        sub->add_option("--bin-edges", cfg.bin_edges, "level-set bin edges")->delimiter(',');
        sub->add_option("--alpha", cfg.alpha, "indistinguishability target");
        sub->add_option("--min-cell", cfg.min_cell, "minimum rows per level set");
        sub->add_option("--max-rounds", cfg.max_rounds, "boosting round cap");
        sub->add_option("--score-col", cfg.score_col, "score column for level_set");
        sub->add_option("--score-rule", cfg.score_rule_path, "score rule config for level_set");
        sub->add_option("--metric", cfg.metric, "epsilon_net metric");
        sub->add_option("--radius", cfg.radius, "epsilon_net radius");
        sub->add_option("--max-depth", cfg.max_depth, "oracle tree depth");
        sub->add_option("--min-leaf", cfg.min_leaf, "oracle minimum leaf size");
        sub->add_option("--replicates", cfg.replicates, "bootstrap replicates");
        sub->add_option("--level", cfg.level, "confidence level");
        sub->add_flag("--no-bonferroni{false}", cfg.bonferroni_correct,
                      "skip the multiple-testing correction");
        sub->add_option("--audit-probes", cfg.audit_probes, "random audit probes per cell");
        sub->add_option("--model", cfg.model, "mean_only | linear | logistic");
        sub->add_option("--eval-split", cfg.eval_split, "train | test");
        sub->add_option("--seed", cfg.seed, "root seed");
        sub->add_option("--out", cfg.out, "output directory");
    };

    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset with ground truth");
    add_common(synth);
    synth->add_option("--n", cfg.synth.n, "rows");
    synth->add_option("--cards", cards, "feature cardinalities, e.g. 4,3,3");
    synth->add_option("--structure", structure,
                      "planted_stump | additive | conditional_independence");
    synth->add_option("--strength", cfg.synth.side_info_strength, "side information strength");
    synth->add_option("--noise", cfg.synth.expert_noise, "expert flip probability");
    synth->add_option("--scale", cfg.synth.scale, "side information scale");
    synth->add_option("--synth-seed", cfg.synth.seed, "generator seed (defaults to --seed)");

    auto* partition = app.add_subcommand("partition", "learn a partition and audit it");
    add_common(partition);
    auto* audit = app.add_subcommand("audit", "re-audit a saved partition artifact");
    add_common(audit);
    audit->add_option("--partition", partition_path, "partition artifact path");
    auto* test_expert =
        app.add_subcommand("test-expert", "per-cell expert signal with bootstrap intervals");
    add_common(test_expert);
    auto* fit = app.add_subcommand("fit", "fit subset models and run the theorem checks");
    add_common(fit);
    auto* policies = app.add_subcommand("policies", "enumerate policies and the pareto frontier");
    add_common(policies);
    auto* report = app.add_subcommand("report", "summarize the artifacts in an output directory");
    add_common(report);
    report->add_option("--thresholds", thresholds, "score thresholds for the decision table");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) {
            if (!cards.empty()) {
                cfg.synth.cardinalities.clear();
                std::stringstream ss(cards);
                std::string tok;
                while (std::getline(ss, tok, ',')) cfg.synth.cardinalities.push_back(std::stoi(tok));
            }
            if (!structure.empty()) cfg.synth.structure = synth_structure_from_string(structure);
            if (synth->count("--seed") && !synth->count("--synth-seed"))
                cfg.synth.seed = cfg.seed;
            return cmd_synth(cfg);
        }
        if (partition->parsed()) return cmd_partition(cfg);
        if (audit->parsed()) return cmd_audit(cfg, partition_path);
        if (test_expert->parsed()) return cmd_test_expert(cfg);
        if (fit->parsed()) return cmd_fit(cfg);
        if (policies->parsed()) return cmd_policies(cfg);
        if (report->parsed()) return cmd_report(cfg, thresholds);
        throw ConfigError("no command given");
    } catch (const NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
