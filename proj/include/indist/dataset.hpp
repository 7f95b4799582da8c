#pragma once

#include "indist/util.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace indist {

// Immutable after construction; all operations below are pure functions of
// their inputs and safe to share across threads.
struct Dataset {
    std::size_t n_rows = 0;
    std::size_t n_features = 0;
    std::size_t n_feedback = 0;
    std::vector<double> features; // row-major n_rows x n_features
    std::vector<double> outcome;  // in [0,1]
    std::vector<double> expert;   // in [0,1]
    std::vector<double> feedback; // row-major n_rows x n_feedback, may be empty
    std::vector<std::string> row_ids;
    std::vector<std::string> feature_names;
    std::vector<std::string> feedback_names;

    MatrixView features_view() const { return {features.data(), n_rows, n_features}; }
    std::span<const double> row(std::size_t i) const {
        return {features.data() + i * n_features, n_features};
    }
    std::span<const double> feedback_row(std::size_t i) const {
        return {feedback.data() + i * n_feedback, n_feedback};
    }
    std::size_t feature_index(const std::string& name) const;

    bool operator==(const Dataset&) const = default;
};

struct ColumnSchema {
    std::vector<std::string> feature_cols;
    std::string outcome_col;
    std::string expert_col;
    std::vector<std::string> feedback_cols;
    std::string id_col;            // empty: row ids default to the 0-based row index
    bool error_on_missing = false; // default drops rows with missing cells
};

struct LoadReport {
    std::size_t rows_kept = 0;
    std::size_t rows_dropped = 0;
};

Dataset load_dataset(const std::filesystem::path& path, const ColumnSchema& schema,
                     LoadReport* report = nullptr);

// Writes a CSV that load_dataset reads back field-for-field (same schema).
void save_dataset(const Dataset& ds, const std::filesystem::path& path, const ColumnSchema& schema);

// Derives the schema a saved dataset round-trips through: id column "row_id",
// features/feedback by name, outcome/expert by their stored roles.
ColumnSchema saved_schema(const Dataset& ds);

struct SplitSpec {
    double train_fraction = 0.8;
    std::uint64_t seed = 0;
};

// Seeded uniform shuffle; train takes floor(train_fraction * n) rows, test the
// remainder. Identical (spec, dataset) gives identical splits.
std::pair<Dataset, Dataset> split_dataset(const Dataset& ds, const SplitSpec& spec);

// Additive integer scoring table over discrete features (Blatchford-style).
// A value falls in the first bin whose upper bound is >= the value.
struct ScoreRule {
    struct Bin {
        double upper = 0.0;
        int points = 0;
    };
    struct FeatureTable {
        std::string feature;
        std::vector<Bin> bins; // ordered by upper bound
    };
    std::vector<FeatureTable> tables;
    int min_score = 0;
    int max_score = 0;
};

ScoreRule load_score_rule(const std::filesystem::path& path);

std::vector<int> score_rule(const Dataset& ds, const ScoreRule& rule);

// Scores a single feature vector; used when a partition routes new inputs
// through a score.
int score_row(std::span<const double> x, const std::vector<std::string>& feature_names,
              const ScoreRule& rule);

} // namespace indist
