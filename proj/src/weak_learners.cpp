#include "indist/weak_learners.hpp"

#include "indist/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace indist {

namespace {

struct SplitChoice {
    std::size_t feature = 0;
    double threshold = 0.0;
    double reduction = 0.0; // parent SSE minus child SSE, weighted
};

// split must beat the parent by more than float noise
constexpr double min_sse_reduction = 1e-12;

double weighted_mean(std::span<const double> targets, std::span<const double> weights,
                     std::span<const std::size_t> rows) {
    double sw = 0.0;
    double swy = 0.0;
    for (const std::size_t r : rows) {
        const double w = weights.empty() ? 1.0 : weights[r];
        sw += w;
        swy += w * targets[r];
    }
    if (sw <= 0.0) { // all-zero weights degrade to the unweighted mean
        double s = 0.0;
        for (const std::size_t r : rows) s += targets[r];
        return rows.empty() ? 0.0 : s / static_cast<double>(rows.size());
    }
    return swy / sw;
}

// Best (feature, threshold) by weighted SSE via a sorted prefix-sum sweep.
// Returns nullopt when no candidate strictly improves on the parent SSE.
std::optional<SplitChoice> best_split(MatrixView features, std::span<const double> targets,
                                      std::span<const double> weights,
                                      std::span<const std::size_t> rows, int min_leaf) {
    const std::size_t n = rows.size();
    if (n < 2 * static_cast<std::size_t>(min_leaf)) return std::nullopt;

    double sw = 0.0;
    double swy = 0.0;
    for (const std::size_t r : rows) {
        const double w = weights.empty() ? 1.0 : weights[r];
        sw += w;
        swy += w * targets[r];
    }
    if (sw <= 0.0) return std::nullopt;

    SplitChoice best;
    bool found = false;

    std::vector<std::size_t> order(rows.begin(), rows.end());
    for (std::size_t j = 0; j < features.cols; ++j) {
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return features.at(a, j) < features.at(b, j);
        });
        double lw = 0.0;
        double lwy = 0.0;
        for (std::size_t k = 0; k + 1 < n; ++k) {
            const std::size_t r = order[k];
            const double w = weights.empty() ? 1.0 : weights[r];
            lw += w;
            lwy += w * targets[r];
            const double v = features.at(r, j);
            const double vnext = features.at(order[k + 1], j);
            if (v == vnext) continue; // midpoints between distinct values only
            const std::size_t n_left = k + 1;
            if (n_left < static_cast<std::size_t>(min_leaf) ||
                n - n_left < static_cast<std::size_t>(min_leaf))
                continue;
            const double rw = sw - lw;
            if (lw <= 0.0 || rw <= 0.0) continue;
            // between-groups identity: parent SSE minus child SSE equals
            // (W S_L - W_L S)^2 / (W_L W_R W); free of cancellation
            const double diff = sw * lwy - lw * swy;
            const double reduction = diff * diff / (lw * rw * sw);
            if (reduction > best.reduction && reduction > min_sse_reduction) {
                best.feature = j;
                best.threshold = 0.5 * (v + vnext);
                best.reduction = reduction;
                found = true;
            }
            // ties keep the earlier (lower feature, smaller threshold) candidate
        }
    }
    if (!found) return std::nullopt;
    return best;
}

int grow(RegressionTree& tree, MatrixView features, std::span<const double> targets,
         std::span<const double> weights, std::vector<std::size_t>& rows, int depth,
         const OracleSpec& spec) {
    const double leaf_value = clamp01(weighted_mean(targets, weights, rows));
    const int node_index = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({-1, 0.0, leaf_value, -1, -1});
    if (depth >= spec.max_depth) return node_index;

    const auto split = best_split(features, targets, weights, rows, spec.min_leaf);
    if (!split) return node_index;

    std::vector<std::size_t> left_rows;
    std::vector<std::size_t> right_rows;
    for (const std::size_t r : rows) {
        if (features.at(r, split->feature) < split->threshold)
            left_rows.push_back(r);
        else
            right_rows.push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    tree.nodes[node_index].feature = static_cast<int>(split->feature);
    tree.nodes[node_index].threshold = split->threshold;
    tree.nodes[node_index].value = 0.0;
    const int left = grow(tree, features, targets, weights, left_rows, depth + 1, spec);
    tree.nodes[node_index].left = left;
    const int right = grow(tree, features, targets, weights, right_rows, depth + 1, spec);
    tree.nodes[node_index].right = right;
    return node_index;
}

int node_depth(const RegressionTree& tree, int i) {
    const auto& n = tree.nodes[static_cast<std::size_t>(i)];
    if (n.feature < 0) return 0;
    return 1 + std::max(node_depth(tree, n.left), node_depth(tree, n.right));
}

void render(const RegressionTree& tree, int i, int indent, std::ostringstream& out) {
    const auto& n = tree.nodes[static_cast<std::size_t>(i)];
    const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    if (n.feature < 0) {
        out << pad << "leaf " << format_double(n.value) << "\n";
    } else {
        out << pad << "split x" << n.feature << " < " << format_double(n.threshold) << "\n";
        render(tree, n.left, indent + 1, out);
        render(tree, n.right, indent + 1, out);
    }
}

void validate_inputs(MatrixView features, std::span<const double> targets,
                     std::span<const double> weights) {
    if (features.rows == 0) throw ConfigError("fit_tree: no rows");
    if (features.rows != targets.size()) throw ConfigError("fit_tree: features/targets length mismatch");
    if (!weights.empty() && weights.size() != targets.size())
        throw ConfigError("fit_tree: weights length mismatch");
    for (const double y : targets)
        if (y < 0.0 || y > 1.0) throw ConfigError("fit_tree: target outside [0,1]");
    for (const double w : weights)
        if (w < 0.0 || !std::isfinite(w)) throw ConfigError("fit_tree: negative or non-finite weight");
}

} // namespace

double RegressionTree::predict(std::span<const double> x) const {
    if (x.size() != n_features) throw ConfigError("predict_tree: dimension mismatch");
    int i = 0;
    while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
        const auto& n = nodes[static_cast<std::size_t>(i)];
        i = x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(i)].value;
}

int RegressionTree::depth() const { return node_depth(*this, 0); }

std::string RegressionTree::to_text() const {
    std::ostringstream out;
    render(*this, 0, 0, out);
    return out.str();
}

void to_json(nlohmann::json& j, const RegressionTree& t) {
    j = nlohmann::json::object();
    j["n_features"] = t.n_features;
    auto nodes = nlohmann::json::array();
    for (const auto& n : t.nodes)
        nodes.push_back({{"feature", n.feature},
                         {"threshold", n.threshold},
                         {"value", n.value},
                         {"left", n.left},
                         {"right", n.right}});
    j["nodes"] = std::move(nodes);
}

void from_json(const nlohmann::json& j, RegressionTree& t) {
    t.n_features = j.at("n_features").get<std::size_t>();
    t.nodes.clear();
    for (const auto& n : j.at("nodes"))
        t.nodes.push_back({n.at("feature").get<int>(), n.at("threshold").get<double>(),
                           n.at("value").get<double>(), n.at("left").get<int>(),
                           n.at("right").get<int>()});
}

RegressionTree fit_tree(MatrixView features, std::span<const double> targets,
                        std::span<const double> weights, const OracleSpec& spec) {
    validate_inputs(features, targets, weights);
    if (spec.max_depth < 0) throw ConfigError("fit_tree: max_depth must be >= 0");
    if (spec.min_leaf < 1) throw ConfigError("fit_tree: min_leaf must be >= 1");

    RegressionTree tree;
    tree.n_features = features.cols;
    std::vector<std::size_t> rows(features.rows);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    grow(tree, features, targets, weights, rows, 0, spec);
    return tree;
}

std::vector<double> split_candidates(MatrixView features, std::span<const std::size_t> rows,
                                     std::size_t feature) {
    std::vector<double> values;
    values.reserve(rows.size());
    for (const std::size_t r : rows) values.push_back(features.at(r, feature));
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    std::vector<double> mids;
    for (std::size_t k = 0; k + 1 < values.size(); ++k)
        mids.push_back(0.5 * (values[k] + values[k + 1]));
    return mids;
}

RegressionTree exhaustive_best_tree(MatrixView features, std::span<const double> targets,
                                    const OracleSpec& spec,
                                    std::span<const double> threshold_grid) {
    validate_inputs(features, targets, {});
    if (spec.max_depth > 1) throw ConfigError("exhaustive_best_tree: depth > 1 rejected");

    const std::size_t n = features.rows;
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});

    const auto side_mse = [&](const std::vector<std::size_t>& rows) {
        double m = 0.0;
        for (const std::size_t r : rows) m += targets[r];
        m /= static_cast<double>(rows.size());
        double sse = 0.0;
        for (const std::size_t r : rows) sse += (targets[r] - m) * (targets[r] - m);
        return std::pair{clamp01(m), sse};
    };

    const auto [root_mean, root_sse] = side_mse(all);
    RegressionTree best;
    best.n_features = features.cols;
    best.nodes.push_back({-1, 0.0, root_mean, -1, -1});
    if (spec.max_depth == 0) return best;

    double best_reduction = 0.0;
    constexpr double min_reduction = 1e-12; // same floor as the greedy fit
    for (std::size_t j = 0; j < features.cols; ++j) {
        std::vector<double> grid;
        if (threshold_grid.empty())
            grid = split_candidates(features, all, j);
        else
            grid.assign(threshold_grid.begin(), threshold_grid.end());
        for (const double t : grid) {
            std::vector<std::size_t> left;
            std::vector<std::size_t> right;
            for (const std::size_t r : all)
                (features.at(r, j) < t ? left : right).push_back(r);
            if (left.size() < static_cast<std::size_t>(spec.min_leaf) ||
                right.size() < static_cast<std::size_t>(spec.min_leaf))
                continue;
            const auto [lm, lsse] = side_mse(left);
            const auto [rm, rsse] = side_mse(right);
            const double reduction = root_sse - (lsse + rsse);
            if (reduction > best_reduction && reduction > min_reduction) {
                best_reduction = reduction;
                best.nodes.clear();
                best.nodes.push_back({static_cast<int>(j), t, 0.0, 1, 2});
                best.nodes.push_back({-1, 0.0, lm, -1, -1});
                best.nodes.push_back({-1, 0.0, rm, -1, -1});
            }
        }
    }
    return best;
}

double tree_mse(const RegressionTree& tree, MatrixView features, std::span<const double> targets) {
    if (features.rows != targets.size()) throw ConfigError("tree_mse: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < features.rows; ++i) {
        const double d = tree.predict(features.row(i)) - targets[i];
        s += d * d;
    }
    return s / static_cast<double>(features.rows);
}

} // namespace indist
