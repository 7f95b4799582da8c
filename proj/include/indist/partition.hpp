#pragma once

#include "indist/dataset.hpp"
#include "indist/weak_learners.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

namespace indist {

enum class PartitionKind { observational, level_set, epsilon_net, boosted };
enum class Metric { euclidean, hamming };

std::string to_string(PartitionKind k);
PartitionKind partition_kind_from_string(const std::string& s);

// Level-set binning over ascending edges e_0 < ... < e_m: bin i is
// [e_i, e_{i+1}) for i < m, plus a singleton bin {e_m} at index m.
// Values outside [e_0, e_m] are out of range.
std::size_t level_bin_count(std::span<const double> edges);
std::optional<std::size_t> level_bin_of(double v, std::span<const double> edges);
std::string level_bin_rule(std::size_t bin, std::span<const double> edges);
std::vector<double> default_unit_edges(); // 0, 0.1, ..., 1.0

// Piecewise predictor built by multicalibration boosting. The patch history
// replays exactly: at each round, the value's current level-set bin selects
// at most one replacement tree.
struct BoostedPredictor {
    double base = 0.5;
    std::vector<double> bin_edges;
    struct Patch {
        int round = 0;
        int bin = 0;
        RegressionTree tree;
        bool operator==(const Patch&) const = default;
    };
    std::vector<Patch> patches;

    double evaluate(std::span<const double> x) const;
    bool operator==(const BoostedPredictor&) const = default;
};

void to_json(nlohmann::json& j, const BoostedPredictor& p);
void from_json(const nlohmann::json& j, BoostedPredictor& p);

struct PartitionCell {
    std::string rule;
    std::vector<std::size_t> train_rows;
};

// Total assignment of feature vectors to cells. Cells are disjoint, cover
// every training row, and each holds at least one row. assign() returns
// reserved_index() for vectors an observational partition has never seen;
// score- and predictor-backed partitions are total by construction.
class Partition {
public:
    PartitionKind kind = PartitionKind::observational;
    std::size_t n_features = 0;
    std::size_t n_train_rows = 0;
    std::vector<PartitionCell> cells;
    std::vector<std::size_t> train_cells; // cell index per training row

    // observational
    std::vector<std::vector<double>> cell_keys;

    // level_set / boosted
    std::vector<double> bin_edges;
    std::vector<int> bin_to_cell; // every bin routes somewhere (merged bins included)
    enum class Scorer { none, feature_column, score_rule, boosted };
    Scorer scorer = Scorer::none;
    std::size_t score_column = 0;
    ScoreRule rule;
    std::vector<std::string> feature_names;
    BoostedPredictor predictor;

    // epsilon_net
    Metric metric = Metric::euclidean;
    double radius = 0.0;
    std::vector<std::vector<double>> centers;

    std::size_t cell_count() const { return cells.size(); }
    std::size_t reserved_index() const { return cells.size(); }

    std::size_t assign(std::span<const double> x) const;
    std::vector<std::size_t> assign_rows(const Dataset& ds) const;
    // For partitions built from a raw score vector (no scorer attached).
    std::size_t assign_score(double score) const;

    void rebuild_lookup(); // after deserialization

private:
    std::unordered_map<std::string, std::size_t> key_lookup_;
};

void to_json(nlohmann::json& j, const Partition& p);
void from_json(const nlohmann::json& j, Partition& p);

// One cell per distinct training feature vector; unseen vectors map to the
// reserved cell.
Partition observational_partition(const Dataset& ds);

// Cells are the occupied level-set bins of the given scores. Without a
// scorer the partition can only place rows by score (assign_score).
Partition level_set_partition(std::span<const double> scores, std::span<const double> bin_edges);
Partition level_set_partition_column(const Dataset& ds, std::size_t column,
                                     std::span<const double> bin_edges);
Partition level_set_partition_rule(const Dataset& ds, const ScoreRule& rule,
                                   std::span<const double> bin_edges);

// Greedy cover: scan rows in order, open a new cell whenever no existing
// center lies within radius; assign maps any vector to its nearest center.
Partition epsilon_net_partition(const Dataset& ds, Metric metric, double radius);

struct BoostResult {
    BoostedPredictor predictor;
    Partition partition;
    bool converged = false;
    int rounds = 0;
    std::vector<double> round_mse;       // total training MSE at the start of each round
    std::vector<double> update_improvements; // per accepted bin update
};

// Multicalibration boosting from h = mean(Y): each round refits the oracle
// on every occupied bin with at least min_cell rows and replaces h there
// when the squared-error improvement reaches alpha^2. The returned partition
// is the occupied level sets of the final h, with sub-min_cell bins merged
// into the nearest qualifying bin.
BoostResult boost_multicalibrated(const Dataset& train, const OracleSpec& oracle, double alpha,
                                  std::span<const double> bin_edges, int min_cell, int max_rounds);

struct CellAudit {
    std::size_t cell = 0;
    std::size_t size = 0;
    double alpha_hat = 0.0;     // max |Cov(f(X), Y)| over the probe set
    std::string best_probe;
    double var_bound = 0.0;     // max Var(f) over the probe set
    double mse_gap = 0.0;       // Var(Y) - MSE of the oracle fit on the cell
    bool small = false;         // < 2 rows; alpha_hat = 0 by convention
    bool exact = false;         // depth <= 1: alpha_hat is exact over all stumps
};

struct AuditReport {
    std::vector<CellAudit> cells;
    OracleSpec oracle;
    int probes = 0;
    std::uint64_t seed = 0;
};

void to_json(nlohmann::json& j, const AuditReport& r);

// For max_depth <= 1 the audit is an exact scan over every axis-aligned
// stump with leaves in [0,1] (any such stump's covariance is |b-a| times an
// indicator stump's, so scanning indicators is exhaustive). For deeper
// classes it is a lower bound from fitted trees plus `probes` random trees.
AuditReport audit_partition(const Partition& p, const Dataset& ds, const OracleSpec& oracle,
                            int probes, std::uint64_t seed);

} // namespace indist
