#pragma once

#include "indist/util.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace indist {

// Reproducibility contract: identical (spec, data) yields identical trees.
struct OracleSpec {
    int max_depth = 1;
    int min_leaf = 5;
    enum class TieBreak { lowest_feature_then_threshold } tie_break =
        TieBreak::lowest_feature_then_threshold;
};

// Axis-aligned binary regression tree; x[feature] < threshold goes left.
// Leaf values are clamped to [0,1] so every tree is a member of the
// predictor class it stands in for.
struct RegressionTree {
    struct Node {
        int feature = -1; // -1 marks a leaf
        double threshold = 0.0;
        double value = 0.0;
        int left = -1;
        int right = -1;
        bool operator==(const Node&) const = default;
    };
    std::vector<Node> nodes; // nodes[0] is the root
    std::size_t n_features = 0;

    bool is_leaf() const { return nodes.size() == 1 && nodes[0].feature < 0; }
    double predict(std::span<const double> x) const;
    int depth() const;
    std::string to_text() const; // nested structured text for reports

    bool operator==(const RegressionTree&) const = default;
};

void to_json(nlohmann::json& j, const RegressionTree& t);
void from_json(const nlohmann::json& j, RegressionTree& t);

// Greedy CART-style fit minimizing weighted squared error. Split candidates
// are midpoints between consecutive sorted unique feature values; ties break
// toward the lowest feature index, then the smallest threshold.
RegressionTree fit_tree(MatrixView features, std::span<const double> targets,
                        std::span<const double> weights, const OracleSpec& spec);

inline RegressionTree fit_tree(MatrixView features, std::span<const double> targets,
                               const OracleSpec& spec) {
    return fit_tree(features, targets, {}, spec);
}

// Globally MSE-optimal stump over the grid (all midpoints per feature when
// the grid is empty), found by direct per-candidate scans. Desk-scale
// verification oracle; rejects max_depth > 1.
RegressionTree exhaustive_best_tree(MatrixView features, std::span<const double> targets,
                                    const OracleSpec& spec,
                                    std::span<const double> threshold_grid = {});

// Midpoints between consecutive distinct values of one feature column.
std::vector<double> split_candidates(MatrixView features, std::span<const std::size_t> rows,
                                     std::size_t feature);

double tree_mse(const RegressionTree& tree, MatrixView features, std::span<const double> targets);

} // namespace indist
