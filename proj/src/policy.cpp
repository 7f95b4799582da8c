#include "indist/policy.hpp"

#include "indist/error.hpp"

#include <algorithm>
#include <array>

namespace indist {

namespace {

constexpr std::size_t max_enumerable_cells = 13;

void check_binary(const Dataset& ds) {
    for (std::size_t i = 0; i < ds.n_rows; ++i) {
        if ((ds.outcome[i] != 0.0 && ds.outcome[i] != 1.0) ||
            (ds.expert[i] != 0.0 && ds.expert[i] != 1.0))
            throw ConfigError("policy evaluation requires binary outcome and expert columns");
    }
}

void tally(ConfusionCounts& c, bool decision, bool outcome) {
    if (decision && outcome) ++c.tp;
    else if (decision && !outcome) ++c.fp;
    else if (!decision && outcome) ++c.fn;
    else ++c.tn;
}

PolicyEval finish_eval(ConfusionCounts total, std::vector<ConfusionCounts> cell_counts,
                       const Policy& pol, std::size_t n_rows) {
    PolicyEval e;
    e.counts = total;
    e.cell_counts = std::move(cell_counts);
    if (total.tp + total.fn > 0)
        e.tpr = static_cast<double>(total.tp) / static_cast<double>(total.tp + total.fn);
    if (total.fp + total.tn > 0)
        e.fpr = static_cast<double>(total.fp) / static_cast<double>(total.fp + total.tn);
    std::size_t automated = 0;
    for (std::size_t k = 0; k < pol.actions.size(); ++k)
        if (pol.actions[k] != Action::defer) automated += e.cell_counts[k].total();
    e.automation = n_rows == 0 ? 0.0 : static_cast<double>(automated) / static_cast<double>(n_rows);
    return e;
}

} // namespace

char action_letter(Action a) {
    switch (a) {
        case Action::admit: return 'A';
        case Action::discharge: return 'D';
        case Action::defer: return 'F';
    }
    return '?';
}

std::string Policy::to_string() const {
    std::string s;
    for (const Action a : actions) s += action_letter(a);
    return s;
}

std::vector<Policy> enumerate_policies(std::size_t K) {
    if (K > max_enumerable_cells)
        throw ConfigError("enumerate_policies: 3^" + std::to_string(K) +
                          " policies is too many to enumerate; sample the policy space instead");
    std::size_t total = 1;
    for (std::size_t k = 0; k < K; ++k) total *= 3;

    std::vector<Policy> out;
    out.reserve(total);
    for (std::size_t code = 0; code < total; ++code) {
        Policy pol;
        pol.actions.resize(K);
        std::size_t rest = code;
        for (std::size_t k = 0; k < K; ++k) { // cell 0 varies fastest
            pol.actions[k] = static_cast<Action>(rest % 3);
            rest /= 3;
        }
        out.push_back(std::move(pol));
    }
    return out;
}

PolicyEval evaluate_policy(const Policy& pol, const Partition& p, const Dataset& ds) {
    if (pol.actions.size() != p.cell_count())
        throw ConfigError("policy length does not match the partition cell count");
    check_binary(ds);

    const auto cells = p.assign_rows(ds);
    ConfusionCounts total;
    std::vector<ConfusionCounts> cell_counts(p.cell_count() + 1);
    for (std::size_t i = 0; i < ds.n_rows; ++i) {
        const std::size_t cell = cells[i];
        const Action a = cell < p.cell_count() ? pol.actions[cell] : Action::defer;
        bool decision = false;
        switch (a) {
            case Action::admit: decision = true; break;
            case Action::discharge: decision = false; break;
            case Action::defer: decision = ds.expert[i] == 1.0; break;
        }
        const bool outcome = ds.outcome[i] == 1.0;
        tally(total, decision, outcome);
        tally(cell_counts[cell], decision, outcome);
    }
    return finish_eval(total, std::move(cell_counts), pol, ds.n_rows);
}

PolicyEvaluator::PolicyEvaluator(const Partition& p, const Dataset& ds)
    : n_cells_(p.cell_count()), n_rows_(ds.n_rows) {
    check_binary(ds);
    per_action_.resize(n_cells_);
    const auto cells = p.assign_rows(ds);
    for (std::size_t i = 0; i < ds.n_rows; ++i) {
        const bool outcome = ds.outcome[i] == 1.0;
        const bool expert = ds.expert[i] == 1.0;
        if (cells[i] >= n_cells_) {
            tally(reserved_, expert, outcome);
            continue;
        }
        auto& slots = per_action_[cells[i]];
        tally(slots[0], true, outcome);   // admit
        tally(slots[1], false, outcome);  // discharge
        tally(slots[2], expert, outcome); // defer
    }
}

PolicyEval PolicyEvaluator::evaluate(const Policy& pol) const {
    if (pol.actions.size() != n_cells_)
        throw ConfigError("policy length does not match the partition cell count");
    ConfusionCounts total = reserved_;
    std::vector<ConfusionCounts> cell_counts(n_cells_ + 1);
    cell_counts[n_cells_] = reserved_;
    for (std::size_t k = 0; k < n_cells_; ++k) {
        const auto& c = per_action_[k][static_cast<std::size_t>(pol.actions[k])];
        cell_counts[k] = c;
        total += c;
    }
    return finish_eval(total, std::move(cell_counts), pol, n_rows_);
}

bool dominates(const PolicyEval& a, const PolicyEval& b) {
    // undefined axes (uniform within one evaluation batch) compare as ties
    bool strict = false;
    if (a.tpr && b.tpr) {
        if (*a.tpr < *b.tpr) return false;
        strict |= *a.tpr > *b.tpr;
    }
    if (a.fpr && b.fpr) {
        if (*a.fpr > *b.fpr) return false;
        strict |= *a.fpr < *b.fpr;
    }
    if (a.automation < b.automation) return false;
    strict |= a.automation > b.automation;
    return strict;
}

std::vector<std::pair<Policy, PolicyEval>> pareto_frontier(
    const std::vector<std::pair<Policy, PolicyEval>>& evals) {
    if (evals.empty()) throw ConfigError("pareto_frontier: empty input");

    // archive sweep: keep the running frontier, drop members a newcomer
    // dominates, skip newcomers any member dominates
    std::vector<std::pair<Policy, PolicyEval>> frontier;
    for (const auto& cand : evals) {
        bool dominated = false;
        for (const auto& kept : frontier) {
            if (dominates(kept.second, cand.second)) {
                dominated = true;
                break;
            }
        }
        if (dominated) continue;
        std::erase_if(frontier, [&](const auto& kept) { return dominates(cand.second, kept.second); });
        frontier.push_back(cand);
    }
    return frontier;
}

} // namespace indist
