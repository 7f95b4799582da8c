#pragma once

#include "indist/dataset.hpp"
#include "indist/partition.hpp"
#include "indist/stats.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace indist {

enum class Action : unsigned char { admit = 0, discharge = 1, defer = 2 };

char action_letter(Action a); // A / D / F

struct Policy {
    std::vector<Action> actions; // one per cell
    std::string to_string() const;
};

// All 3^K per-cell action assignments in deterministic base-3 order: cell 0
// is the fastest-varying digit, with admit=0, discharge=1, defer=2.
// K above 13 is rejected (3^13 is already ~1.6M policies); sample instead.
std::vector<Policy> enumerate_policies(std::size_t K);

struct PolicyEval {
    std::optional<double> tpr; // empty when the evaluation set has no positives
    std::optional<double> fpr; // empty when it has no negatives
    double automation = 0.0;   // fraction of rows in non-defer cells
    ConfusionCounts counts;
    std::vector<ConfusionCounts> cell_counts; // per cell, last entry = reserved cell

    bool operator==(const PolicyEval&) const = default;
};

// Per-row decision: admit -> 1, discharge -> 0, defer -> the expert's call.
// Rows routed to the reserved cell always defer. Requires binary Y and Yhat.
PolicyEval evaluate_policy(const Policy& pol, const Partition& p, const Dataset& ds);

// Precomputed per-cell action contributions make batch evaluation a K-term
// sum per policy, so the full 3^K sweep stays cheap.
class PolicyEvaluator {
public:
    PolicyEvaluator(const Partition& p, const Dataset& ds);
    PolicyEval evaluate(const Policy& pol) const;
    std::size_t cell_count() const { return n_cells_; }

private:
    std::size_t n_cells_ = 0;
    std::size_t n_rows_ = 0;
    std::vector<std::array<ConfusionCounts, 3>> per_action_; // [cell][action]
    ConfusionCounts reserved_;                               // always defers
};

// Removes every policy that is Pareto dominated: another policy with weakly
// larger TPR, weakly smaller FPR and weakly larger automation, strict
// somewhere. Undefined axes compare as ties. Input order is preserved and
// exact-tie duplicates are all retained.
std::vector<std::pair<Policy, PolicyEval>> pareto_frontier(
    const std::vector<std::pair<Policy, PolicyEval>>& evals);

bool dominates(const PolicyEval& a, const PolicyEval& b);

} // namespace indist
