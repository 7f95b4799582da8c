#include "indist/partition.hpp"

#include "indist/error.hpp"
#include "indist/rng.hpp"
#include "indist/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <sstream>

namespace indist {

namespace {

std::string vector_key(std::span<const double> x) {
    std::string key(x.size() * sizeof(double), '\0');
    for (std::size_t i = 0; i < x.size(); ++i) {
        double v = x[i];
        if (v == 0.0) v = 0.0; // fold -0.0 into +0.0
        std::memcpy(key.data() + i * sizeof(double), &v, sizeof(double));
    }
    return key;
}

std::string vector_rule(std::span<const double> x) {
    std::string s = "x=(";
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (i) s += ",";
        s += format_double(x[i]);
    }
    return s + ")";
}

double distance(std::span<const double> a, std::span<const double> b, Metric m) {
    double d = 0.0;
    if (m == Metric::euclidean) {
        for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
        return std::sqrt(d);
    }
    for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i] ? 1.0 : 0.0;
    return d;
}

void gather(const Dataset& ds, std::span<const std::size_t> rows, std::vector<double>& xs,
            std::vector<double>& ys) {
    xs.clear();
    ys.clear();
    for (const std::size_t r : rows) {
        const auto row = ds.row(r);
        xs.insert(xs.end(), row.begin(), row.end());
        ys.push_back(ds.outcome[r]);
    }
}

// Routes every bin to a cell: qualifying bins keep their own cell, the rest
// go to the nearest qualifying bin (ties toward the lower index).
std::vector<int> route_bins(std::size_t n_bins, const std::vector<std::size_t>& cell_of_bin,
                            const std::vector<std::size_t>& qualifying_bins) {
    std::vector<int> out(n_bins, -1);
    for (std::size_t b = 0; b < n_bins; ++b) {
        std::size_t best = qualifying_bins.front();
        for (const std::size_t q : qualifying_bins) {
            const auto db = b > q ? b - q : q - b;
            const auto dbest = b > best ? b - best : best - b;
            if (db < dbest) best = q;
        }
        out[b] = static_cast<int>(cell_of_bin[best]);
    }
    return out;
}

RegressionTree random_probe_tree(const Dataset& ds, std::span<const std::size_t> rows,
                                 const OracleSpec& oracle, Rng& rng) {
    RegressionTree tree;
    tree.n_features = ds.n_features;

    std::vector<double> lo(ds.n_features, std::numeric_limits<double>::infinity());
    std::vector<double> hi(ds.n_features, -std::numeric_limits<double>::infinity());
    for (const std::size_t r : rows) {
        const auto row = ds.row(r);
        for (std::size_t j = 0; j < ds.n_features; ++j) {
            lo[j] = std::min(lo[j], row[j]);
            hi[j] = std::max(hi[j], row[j]);
        }
    }

    // recursive random structure, bounded by the oracle depth
    const std::function<int(int)> build = [&](int depth) -> int {
        const int idx = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back({});
        const std::size_t j = rng.index(ds.n_features);
        if (depth >= oracle.max_depth || lo[j] == hi[j] || rng.uniform() < 0.5) {
            tree.nodes[idx] = {-1, 0.0, rng.uniform(), -1, -1};
            return idx;
        }
        const double t = lo[j] + rng.uniform() * (hi[j] - lo[j]);
        tree.nodes[idx].feature = static_cast<int>(j);
        tree.nodes[idx].threshold = t;
        const int l = build(depth + 1);
        tree.nodes[idx].left = l;
        const int r = build(depth + 1);
        tree.nodes[idx].right = r;
        return idx;
    };
    build(0);
    return tree;
}

} // namespace

std::string to_string(PartitionKind k) {
    switch (k) {
        case PartitionKind::observational: return "observational";
        case PartitionKind::level_set: return "level_set";
        case PartitionKind::epsilon_net: return "epsilon_net";
        case PartitionKind::boosted: return "boosted";
    }
    return "?";
}

PartitionKind partition_kind_from_string(const std::string& s) {
    if (s == "observational") return PartitionKind::observational;
    if (s == "level_set") return PartitionKind::level_set;
    if (s == "epsilon_net") return PartitionKind::epsilon_net;
    if (s == "boosted") return PartitionKind::boosted;
    throw ConfigError("unknown partition kind: " + s);
}

std::size_t level_bin_count(std::span<const double> edges) {
    if (edges.size() < 2) throw ConfigError("need at least two bin edges");
    return edges.size();
}

std::optional<std::size_t> level_bin_of(double v, std::span<const double> edges) {
    if (v < edges.front() || v > edges.back()) return std::nullopt;
    if (v == edges.back()) return edges.size() - 1; // singleton top bin
    const auto it = std::upper_bound(edges.begin(), edges.end(), v);
    return static_cast<std::size_t>(it - edges.begin()) - 1;
}

std::string level_bin_rule(std::size_t bin, std::span<const double> edges) {
    if (bin + 1 == edges.size()) return "{" + format_double(edges.back()) + "}";
    return "[" + format_double(edges[bin]) + "," + format_double(edges[bin + 1]) + ")";
}

std::vector<double> default_unit_edges() {
    std::vector<double> e;
    for (int i = 0; i <= 10; ++i) e.push_back(static_cast<double>(i) / 10.0);
    return e;
}

double BoostedPredictor::evaluate(std::span<const double> x) const {
    double v = base;
    std::size_t p = 0;
    while (p < patches.size()) {
        const int round = patches[p].round;
        const auto bin = level_bin_of(v, bin_edges);
        double next = v;
        while (p < patches.size() && patches[p].round == round) {
            if (bin && patches[p].bin == static_cast<int>(*bin))
                next = patches[p].tree.predict(x);
            ++p;
        }
        v = next;
    }
    return v;
}

void to_json(nlohmann::json& j, const BoostedPredictor& p) {
    j = nlohmann::json::object();
    j["base"] = p.base;
    j["bin_edges"] = p.bin_edges;
    auto patches = nlohmann::json::array();
    for (const auto& patch : p.patches) {
        nlohmann::json t;
        to_json(t, patch.tree);
        patches.push_back({{"round", patch.round}, {"bin", patch.bin}, {"tree", std::move(t)}});
    }
    j["patches"] = std::move(patches);
}

void from_json(const nlohmann::json& j, BoostedPredictor& p) {
    p.base = j.at("base").get<double>();
    p.bin_edges = j.at("bin_edges").get<std::vector<double>>();
    p.patches.clear();
    for (const auto& jp : j.at("patches")) {
        BoostedPredictor::Patch patch;
        patch.round = jp.at("round").get<int>();
        patch.bin = jp.at("bin").get<int>();
        from_json(jp.at("tree"), patch.tree);
        p.patches.push_back(std::move(patch));
    }
}

void Partition::rebuild_lookup() {
    key_lookup_.clear();
    for (std::size_t k = 0; k < cell_keys.size(); ++k)
        key_lookup_[vector_key(cell_keys[k])] = k;
}

std::size_t Partition::assign_score(double score) const {
    const auto bin = level_bin_of(score, bin_edges);
    if (!bin)
        throw ConfigError("score " + format_double(score) + " outside covered range [" +
                          format_double(bin_edges.front()) + "," + format_double(bin_edges.back()) +
                          "]");
    return static_cast<std::size_t>(bin_to_cell[*bin]);
}

std::size_t Partition::assign(std::span<const double> x) const {
    if (x.size() != n_features) throw ConfigError("assign: dimension mismatch");
    switch (kind) {
        case PartitionKind::observational: {
            const auto it = key_lookup_.find(vector_key(x));
            return it == key_lookup_.end() ? reserved_index() : it->second;
        }
        case PartitionKind::epsilon_net: {
            std::size_t best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < centers.size(); ++c) {
                const double d = distance(x, centers[c], metric);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            return best;
        }
        case PartitionKind::level_set:
        case PartitionKind::boosted: {
            switch (scorer) {
                case Scorer::feature_column: return assign_score(x[score_column]);
                case Scorer::score_rule:
                    return assign_score(static_cast<double>(score_row(x, feature_names, rule)));
                case Scorer::boosted: return assign_score(predictor.evaluate(x));
                case Scorer::none:
                    throw ConfigError(
                        "partition was built from a raw score vector; use assign_score");
            }
        }
    }
    throw ConfigError("assign: bad partition state");
}

std::vector<std::size_t> Partition::assign_rows(const Dataset& ds) const {
    std::vector<std::size_t> out(ds.n_rows);
    for (std::size_t i = 0; i < ds.n_rows; ++i) out[i] = assign(ds.row(i));
    return out;
}

Partition observational_partition(const Dataset& ds) {
    Partition p;
    p.kind = PartitionKind::observational;
    p.n_features = ds.n_features;
    p.n_train_rows = ds.n_rows;
    p.train_cells.resize(ds.n_rows);

    std::unordered_map<std::string, std::size_t> seen;
    for (std::size_t i = 0; i < ds.n_rows; ++i) {
        const auto row = ds.row(i);
        const auto key = vector_key(row);
        const auto it = seen.find(key);
        std::size_t cell;
        if (it == seen.end()) {
            cell = p.cells.size();
            seen.emplace(key, cell);
            p.cells.push_back({vector_rule(row), {}});
            p.cell_keys.emplace_back(row.begin(), row.end());
        } else {
            cell = it->second;
        }
        p.cells[cell].train_rows.push_back(i);
        p.train_cells[i] = cell;
    }
    p.rebuild_lookup();
    return p;
}

Partition level_set_partition(std::span<const double> scores, std::span<const double> bin_edges) {
    const std::size_t n_bins = level_bin_count(bin_edges);
    if (!std::is_sorted(bin_edges.begin(), bin_edges.end()))
        throw ConfigError("bin edges must be ascending");

    Partition p;
    p.kind = PartitionKind::level_set;
    p.n_train_rows = scores.size();
    p.bin_edges.assign(bin_edges.begin(), bin_edges.end());

    std::vector<std::vector<std::size_t>> bin_rows(n_bins);
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const auto bin = level_bin_of(scores[i], bin_edges);
        if (!bin)
            throw ConfigError("score " + format_double(scores[i]) + " outside covered range");
        bin_rows[*bin].push_back(i);
    }

    std::vector<std::size_t> cell_of_bin(n_bins, 0);
    std::vector<std::size_t> occupied;
    for (std::size_t b = 0; b < n_bins; ++b) {
        if (bin_rows[b].empty()) continue; // empty bins are dropped
        cell_of_bin[b] = p.cells.size();
        occupied.push_back(b);
        p.cells.push_back({level_bin_rule(b, bin_edges), bin_rows[b]});
    }
    if (occupied.empty()) throw ConfigError("no occupied score bins");
    p.bin_to_cell = route_bins(n_bins, cell_of_bin, occupied);

    p.train_cells.resize(scores.size());
    for (std::size_t k = 0; k < p.cells.size(); ++k)
        for (const std::size_t r : p.cells[k].train_rows) p.train_cells[r] = k;
    return p;
}

Partition level_set_partition_column(const Dataset& ds, std::size_t column,
                                     std::span<const double> bin_edges) {
    if (column >= ds.n_features) throw ConfigError("score column index out of range");
    std::vector<double> scores(ds.n_rows);
    for (std::size_t i = 0; i < ds.n_rows; ++i) scores[i] = ds.row(i)[column];
    Partition p = level_set_partition(scores, bin_edges);
    p.n_features = ds.n_features;
    p.scorer = Partition::Scorer::feature_column;
    p.score_column = column;
    return p;
}

Partition level_set_partition_rule(const Dataset& ds, const ScoreRule& rule,
                                   std::span<const double> bin_edges) {
    const auto int_scores = score_rule(ds, rule);
    std::vector<double> scores(int_scores.begin(), int_scores.end());
    Partition p = level_set_partition(scores, bin_edges);
    p.n_features = ds.n_features;
    p.scorer = Partition::Scorer::score_rule;
    p.rule = rule;
    p.feature_names = ds.feature_names;
    return p;
}

Partition epsilon_net_partition(const Dataset& ds, Metric metric, double radius) {
    if (radius <= 0.0) throw ConfigError("epsilon_net radius must be positive");

    Partition p;
    p.kind = PartitionKind::epsilon_net;
    p.n_features = ds.n_features;
    p.n_train_rows = ds.n_rows;
    p.metric = metric;
    p.radius = radius;

    for (std::size_t i = 0; i < ds.n_rows; ++i) {
        const auto row = ds.row(i);
        bool covered = false;
        for (const auto& c : p.centers) {
            if (distance(row, c, metric) <= radius) {
                covered = true;
                break;
            }
        }
        if (!covered) {
            p.centers.emplace_back(row.begin(), row.end());
            p.cells.push_back({"ball around " + vector_rule(row), {}});
        }
    }
    // every center is its own nearest point (pairwise center distances
    // exceed the radius), so no cell can end up empty
    p.train_cells.resize(ds.n_rows);
    for (std::size_t i = 0; i < ds.n_rows; ++i) {
        const std::size_t c = p.assign(ds.row(i));
        p.cells[c].train_rows.push_back(i);
        p.train_cells[i] = c;
    }
    return p;
}

BoostResult boost_multicalibrated(const Dataset& train, const OracleSpec& oracle, double alpha,
                                  std::span<const double> bin_edges, int min_cell, int max_rounds) {
    if (min_cell < 1) throw ConfigError("min_cell must be >= 1");
    if (alpha <= 0.0) throw ConfigError("alpha must be positive");
    if (max_rounds < 1) throw ConfigError("max_rounds must be >= 1");
    const std::size_t n_bins = level_bin_count(bin_edges);
    const double alpha_sq = alpha * alpha;
    const std::size_t n = train.n_rows;

    BoostResult res;
    res.predictor.base = clamp01(mean(train.outcome));
    res.predictor.bin_edges.assign(bin_edges.begin(), bin_edges.end());

    std::vector<double> h(n, res.predictor.base);
    std::vector<double> xs;
    std::vector<double> ys;

    const auto bin_groups = [&] {
        std::vector<std::vector<std::size_t>> groups(n_bins);
        for (std::size_t i = 0; i < n; ++i) {
            const auto b = level_bin_of(h[i], bin_edges);
            if (!b) throw NumericError("boosting produced a value outside the bin range");
            groups[*b].push_back(i);
        }
        return groups;
    };
    const auto total_mse = [&] {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += (h[i] - train.outcome[i]) * (h[i] - train.outcome[i]);
        return s / static_cast<double>(n);
    };

    for (int round = 0; round < max_rounds; ++round) {
        res.round_mse.push_back(total_mse());
        const auto groups = bin_groups();
        bool updated = false;
        for (std::size_t b = 0; b < n_bins; ++b) {
            const auto& rows = groups[b];
            if (rows.size() < static_cast<std::size_t>(min_cell)) continue;

            gather(train, rows, xs, ys);
            const MatrixView view{xs.data(), rows.size(), train.n_features};
            RegressionTree f = fit_tree(view, ys, oracle);

            double gap = 0.0; // bin MSE of h minus bin MSE of f
            std::vector<double> preds(rows.size());
            for (std::size_t k = 0; k < rows.size(); ++k) {
                preds[k] = f.predict(view.row(k));
                const double eh = h[rows[k]] - ys[k];
                const double ef = preds[k] - ys[k];
                gap += eh * eh - ef * ef;
            }
            gap /= static_cast<double>(rows.size());
            if (gap >= alpha_sq) {
                res.predictor.patches.push_back({round, static_cast<int>(b), std::move(f)});
                for (std::size_t k = 0; k < rows.size(); ++k) h[rows[k]] = preds[k];
                res.update_improvements.push_back(gap);
                updated = true;
            }
        }
        ++res.rounds;
        if (!updated) {
            res.converged = true;
            break;
        }
    }

    // final partition: occupied level sets, small bins merged into the
    // nearest bin that meets min_cell (all occupied bins when none does)
    const auto groups = bin_groups();
    Partition p;
    p.kind = PartitionKind::boosted;
    p.n_features = train.n_features;
    p.n_train_rows = n;
    p.bin_edges = res.predictor.bin_edges;
    p.scorer = Partition::Scorer::boosted;
    p.predictor = res.predictor;

    std::vector<std::size_t> qualifying;
    for (std::size_t b = 0; b < n_bins; ++b)
        if (groups[b].size() >= static_cast<std::size_t>(min_cell)) qualifying.push_back(b);
    if (qualifying.empty())
        for (std::size_t b = 0; b < n_bins; ++b)
            if (!groups[b].empty()) qualifying.push_back(b);

    std::vector<std::size_t> cell_of_bin(n_bins, 0);
    for (const std::size_t b : qualifying) {
        cell_of_bin[b] = p.cells.size();
        p.cells.push_back({"h in " + level_bin_rule(b, res.predictor.bin_edges), {}});
    }
    p.bin_to_cell = route_bins(n_bins, cell_of_bin, qualifying);

    p.train_cells.resize(n);
    for (std::size_t b = 0; b < n_bins; ++b) {
        const auto cell = static_cast<std::size_t>(p.bin_to_cell[b]);
        for (const std::size_t r : groups[b]) {
            p.cells[cell].train_rows.push_back(r);
            p.train_cells[r] = cell;
        }
    }
    for (auto& cell : p.cells) std::sort(cell.train_rows.begin(), cell.train_rows.end());

    res.partition = std::move(p);
    return res;
}

namespace {

struct StumpScanResult {
    double max_abs_cov = 0.0;
    double max_var = 0.0;
    std::string best;
};

// Exact max |Cov(1{x_j < t}, Y)| over every feature and every distinct
// threshold within the cell, by sorted prefix sums.
StumpScanResult exact_stump_scan(const Dataset& ds, std::span<const std::size_t> rows) {
    const auto s = static_cast<double>(rows.size());
    double sy = 0.0;
    for (const std::size_t r : rows) sy += ds.outcome[r];
    const double ymean = sy / s;

    StumpScanResult out;
    out.best = "constant";
    std::vector<std::pair<double, double>> pairs(rows.size());
    for (std::size_t j = 0; j < ds.n_features; ++j) {
        for (std::size_t k = 0; k < rows.size(); ++k)
            pairs[k] = {ds.row(rows[k])[j], ds.outcome[rows[k]]};
        std::sort(pairs.begin(), pairs.end());
        double left_y = 0.0;
        for (std::size_t k = 0; k + 1 < pairs.size(); ++k) {
            left_y += pairs[k].second;
            if (pairs[k].first == pairs[k + 1].first) continue;
            const double frac_left = static_cast<double>(k + 1) / s;
            const double cov = left_y / s - frac_left * ymean;
            const double var = frac_left * (1.0 - frac_left);
            out.max_var = std::max(out.max_var, var);
            if (std::abs(cov) > out.max_abs_cov) {
                out.max_abs_cov = std::abs(cov);
                out.best = "stump x" + std::to_string(j) + " < " +
                           format_double(0.5 * (pairs[k].first + pairs[k + 1].first));
            }
        }
    }
    return out;
}

} // namespace

void to_json(nlohmann::json& j, const AuditReport& r) {
    j = nlohmann::json::object();
    j["oracle"] = {{"max_depth", r.oracle.max_depth}, {"min_leaf", r.oracle.min_leaf}};
    j["probes"] = r.probes;
    j["seed"] = r.seed;
    auto cells = nlohmann::json::array();
    for (const auto& c : r.cells)
        cells.push_back({{"cell", c.cell},
                         {"size", c.size},
                         {"alpha_hat", c.alpha_hat},
                         {"best_probe", c.best_probe},
                         {"var_bound", c.var_bound},
                         {"mse_gap", c.mse_gap},
                         {"small", c.small},
                         {"exact", c.exact}});
    j["cells"] = std::move(cells);
}

AuditReport audit_partition(const Partition& p, const Dataset& ds, const OracleSpec& oracle,
                            int probes, std::uint64_t seed) {
    if (probes < 0) throw ConfigError("probes must be >= 0");
    AuditReport report;
    report.oracle = oracle;
    report.probes = probes;
    report.seed = seed;

    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t k = 0; k < p.cells.size(); ++k) {
        const auto& rows = p.cells[k].train_rows;
        CellAudit audit;
        audit.cell = k;
        audit.size = rows.size();
        if (rows.size() < 2) {
            audit.small = true;
            audit.best_probe = "(cell too small)";
            report.cells.push_back(std::move(audit));
            continue;
        }

        gather(ds, rows, xs, ys);
        const MatrixView view{xs.data(), rows.size(), ds.n_features};
        const double var_y = variance(ys);

        const RegressionTree fitted = fit_tree(view, ys, oracle);
        std::vector<double> preds(rows.size());
        const auto eval_probe = [&](const RegressionTree& f, const std::string& name) {
            for (std::size_t i = 0; i < rows.size(); ++i) preds[i] = f.predict(view.row(i));
            const double cov = std::abs(covariance(preds, ys));
            audit.var_bound = std::max(audit.var_bound, variance(preds));
            if (cov > audit.alpha_hat) {
                audit.alpha_hat = cov;
                audit.best_probe = name;
            }
        };

        double fitted_mse = 0.0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const double d = fitted.predict(view.row(i)) - ys[i];
            fitted_mse += d * d;
        }
        audit.mse_gap = var_y - fitted_mse / static_cast<double>(rows.size());

        if (oracle.max_depth <= 1) {
            audit.exact = true;
            if (oracle.max_depth == 1) {
                const auto scan = exact_stump_scan(ds, rows);
                audit.alpha_hat = scan.max_abs_cov;
                audit.var_bound = scan.max_var;
                audit.best_probe = scan.best;
            } else {
                audit.best_probe = "constant";
            }
        } else {
            audit.best_probe = "constant";
            eval_probe(fitted, "oracle fit on Y");
            std::vector<double> flipped(ys.size());
            for (std::size_t i = 0; i < ys.size(); ++i) flipped[i] = 1.0 - ys[i];
            eval_probe(fit_tree(view, flipped, oracle), "oracle fit on -Y");
            for (int q = 0; q < probes; ++q) {
                Rng rng(derive_seed(seed, "audit_probe", k * 1000003ULL + static_cast<std::uint64_t>(q)));
                eval_probe(random_probe_tree(ds, rows, oracle, rng),
                           "random probe " + std::to_string(q));
            }
        }
        report.cells.push_back(std::move(audit));
    }
    return report;
}

void to_json(nlohmann::json& j, const Partition& p) {
    j = nlohmann::json::object();
    j["kind"] = to_string(p.kind);
    j["n_features"] = p.n_features;
    j["n_train_rows"] = p.n_train_rows;
    j["train_cells"] = p.train_cells;
    auto cells = nlohmann::json::array();
    for (const auto& c : p.cells) cells.push_back({{"rule", c.rule}, {"train_rows", c.train_rows}});
    j["cells"] = std::move(cells);

    switch (p.kind) {
        case PartitionKind::observational: j["cell_keys"] = p.cell_keys; break;
        case PartitionKind::epsilon_net:
            j["metric"] = p.metric == Metric::euclidean ? "euclidean" : "hamming";
            j["radius"] = p.radius;
            j["centers"] = p.centers;
            break;
        case PartitionKind::level_set:
        case PartitionKind::boosted: {
            j["bin_edges"] = p.bin_edges;
            j["bin_to_cell"] = p.bin_to_cell;
            switch (p.scorer) {
                case Partition::Scorer::none: j["scorer"] = "none"; break;
                case Partition::Scorer::feature_column:
                    j["scorer"] = "feature_column";
                    j["score_column"] = p.score_column;
                    break;
                case Partition::Scorer::score_rule: {
                    j["scorer"] = "score_rule";
                    auto tables = nlohmann::json::array();
                    for (const auto& t : p.rule.tables) {
                        auto bins = nlohmann::json::array();
                        for (const auto& b : t.bins) bins.push_back({b.upper, b.points});
                        tables.push_back({{"feature", t.feature}, {"bins", std::move(bins)}});
                    }
                    j["score_rule"] = {{"range", {p.rule.min_score, p.rule.max_score}},
                                       {"features", std::move(tables)}};
                    j["feature_names"] = p.feature_names;
                    break;
                }
                case Partition::Scorer::boosted: {
                    j["scorer"] = "boosted";
                    nlohmann::json jp;
                    to_json(jp, p.predictor);
                    j["predictor"] = std::move(jp);
                    break;
                }
            }
            break;
        }
    }
}

void from_json(const nlohmann::json& j, Partition& p) {
    p = Partition{};
    p.kind = partition_kind_from_string(j.at("kind").get<std::string>());
    p.n_features = j.at("n_features").get<std::size_t>();
    p.n_train_rows = j.at("n_train_rows").get<std::size_t>();
    p.train_cells = j.at("train_cells").get<std::vector<std::size_t>>();
    for (const auto& c : j.at("cells"))
        p.cells.push_back({c.at("rule").get<std::string>(),
                           c.at("train_rows").get<std::vector<std::size_t>>()});

    switch (p.kind) {
        case PartitionKind::observational:
            p.cell_keys = j.at("cell_keys").get<std::vector<std::vector<double>>>();
            p.rebuild_lookup();
            break;
        case PartitionKind::epsilon_net:
            p.metric = j.at("metric").get<std::string>() == "euclidean" ? Metric::euclidean
                                                                        : Metric::hamming;
            p.radius = j.at("radius").get<double>();
            p.centers = j.at("centers").get<std::vector<std::vector<double>>>();
            break;
        case PartitionKind::level_set:
        case PartitionKind::boosted: {
            p.bin_edges = j.at("bin_edges").get<std::vector<double>>();
            p.bin_to_cell = j.at("bin_to_cell").get<std::vector<int>>();
            const auto scorer = j.at("scorer").get<std::string>();
            if (scorer == "none") {
                p.scorer = Partition::Scorer::none;
            } else if (scorer == "feature_column") {
                p.scorer = Partition::Scorer::feature_column;
                p.score_column = j.at("score_column").get<std::size_t>();
            } else if (scorer == "score_rule") {
                p.scorer = Partition::Scorer::score_rule;
                const auto& jr = j.at("score_rule");
                p.rule.min_score = jr.at("range").at(0).get<int>();
                p.rule.max_score = jr.at("range").at(1).get<int>();
                for (const auto& t : jr.at("features")) {
                    ScoreRule::FeatureTable ft;
                    ft.feature = t.at("feature").get<std::string>();
                    for (const auto& b : t.at("bins"))
                        ft.bins.push_back({b.at(0).get<double>(), b.at(1).get<int>()});
                    p.rule.tables.push_back(std::move(ft));
                }
                p.feature_names = j.at("feature_names").get<std::vector<std::string>>();
            } else if (scorer == "boosted") {
                p.scorer = Partition::Scorer::boosted;
                from_json(j.at("predictor"), p.predictor);
            } else {
                throw ConfigError("unknown scorer: " + scorer);
            }
            break;
        }
    }
}

} // namespace indist
