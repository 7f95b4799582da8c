#pragma once

#include "indist/dataset.hpp"
#include "indist/partition.hpp"
#include "indist/stats.hpp"
#include "indist/weak_learners.hpp"

#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"

namespace indist {

enum class ModelKind { mean_only, linear, logistic };

std::string to_string(ModelKind k);
ModelKind model_kind_from_string(const std::string& s);

// Per-cell regressor of the outcome on the expert prediction. Predictions
// clamp to [0,1]; rows routed to the reserved cell fall back to the global
// training mean.
struct SubsetModels {
    struct CellModel {
        std::size_t n = 0;
        double mean = 0.0;      // per-cell training mean of Y
        double intercept = 0.0; // gamma
        double slope = 0.0;     // beta = Cov(Y, Yhat) / Var(Yhat)
        double log_a = 0.0;     // logistic intercept
        double log_b = 0.0;     // logistic slope
        bool logistic_fallback = false; // separation or non-convergence
    };
    ModelKind kind = ModelKind::mean_only;
    std::vector<CellModel> cells;
    double global_mean = 0.0;

    double raw(std::size_t cell, double yhat) const; // pre-clamp value
    double predict(std::size_t cell, double yhat) const;
};

void to_json(nlohmann::json& j, const SubsetModels& m);
void from_json(const nlohmann::json& j, SubsetModels& m);

SubsetModels fit_subset_models(const Partition& p, const Dataset& train, ModelKind kind);

double predict_collab(const SubsetModels& m, const Partition& p, std::span<const double> x,
                      double yhat);

// One row of the per-subset squared-error comparison: the subset model plus
// its covariance bonus on the left, a comparator from the predictor class
// plus the audit slack on the right.
struct CellTheoremCheck {
    std::size_t cell = 0;
    std::size_t n = 0; // evaluation rows landing in this cell
    double mse_model = 0.0;
    double cov = 0.0; // Cov(Y, Yhat) on the evaluation rows in the cell
    double lhs = 0.0; // mse_model + 4 cov^2
    double mse_comparator = 0.0;
    double alpha_hat = 0.0;
    double rhs = 0.0; // mse_comparator + 2 alpha_hat
    double slack = 0.0;
    bool holds = false;
    // set when the inequality fails: the comparator itself, re-run as an
    // audit probe, exceeds alpha_hat — the audit understated the class
    // rather than the regression being wrong
    double comparator_cov = 0.0;
    bool audit_underestimate = false;
};

struct TheoremCheck {
    std::vector<CellTheoremCheck> cells;
    double tol = 0.0;
    bool all_hold = false;
};

TheoremCheck theorem1_check(const SubsetModels& m, const Partition& p, const Dataset& eval,
                            const RegressionTree& comparator, const AuditReport& audit, double tol);

// Cell-wise variant used when each cell gets its own comparator.
CellTheoremCheck theorem1_check_cell(const SubsetModels& m, std::size_t cell,
                                     std::span<const std::size_t> rows, const Dataset& eval,
                                     const RegressionTree& comparator, double alpha_hat,
                                     double tol);

struct Certificate {
    std::size_t cell = 0;
    std::size_t size = 0;
    double cov_abs = 0.0;
    IntervalEstimate interval;
    double threshold = 0.0; // sqrt(alpha / 2)
    bool fired = false;     // interval lower bound exceeds the threshold
};

// Bootstrap certificates that the expert carries signal no predictor subset
// can explain: fired when the interval lower bound for |Cov(Y, Yhat)| within
// the cell exceeds sqrt(alpha/2).
std::vector<Certificate> theorem2_certificates(const Partition& p, const Dataset& ds, double alpha,
                                               int replicates, double level, std::uint64_t seed);

struct CalibratedFeedback {
    std::vector<double> values; // clamp(gamma + beta * gh) on the cell rows
    double gamma = 0.0;
    double beta = 0.0;
};

// Least-squares post-processing of a feedback predictor within one cell;
// constant gh degrades to the cell mean of Y.
CalibratedFeedback calibrate_feedback(std::span<const double> gh, std::span<const double> y);

} // namespace indist
