#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace indist {

struct ConfusionCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;

    std::size_t total() const { return tp + fp + tn + fn; }
    ConfusionCounts& operator+=(const ConfusionCounts& o) {
        tp += o.tp;
        fp += o.fp;
        tn += o.tn;
        fn += o.fn;
        return *this;
    }
    bool operator==(const ConfusionCounts&) const = default;
};

struct ClassificationMetrics {
    double fraction_positive = 0.0;
    double accuracy = 0.0;
    std::optional<double> sensitivity; // empty when no positives
    std::optional<double> specificity; // empty when no negatives
    ConfusionCounts counts;
};

struct IntervalEstimate {
    double point = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    double level = 0.0;
    int replicates = 0;
    std::uint64_t seed = 0;
    int missing = 0; // replicates where the statistic was undefined
};

// Population covariance: (1/n) * sum (a_i - mean(a)) (b_i - mean(b)).
// The denominator-n convention makes beta = cov/var hold exactly against
// least-squares fits.
double covariance(std::span<const double> a, std::span<const double> b);
double variance(std::span<const double> a);

// Pearson correlation of two binary vectors; 0 when either vector is
// constant (degenerate denominator), with the flag set if provided.
double mcc(std::span<const double> pred, std::span<const double> outcome, bool* degenerate = nullptr);

double pearson(std::span<const double> a, std::span<const double> b, bool* degenerate = nullptr);

// Statistic evaluated on a with-replacement resample, given by row indices.
// Returns nullopt when undefined on that resample.
using ResampleStat = std::function<std::optional<double>(std::span<const std::size_t>)>;

// Percentile bootstrap over `replicates` seeded resamples of {0..n_rows-1}.
// Replicate r draws its indices from derive_seed(seed, "bootstrap", r), so
// replicates are independent of each other and of the replicate count.
IntervalEstimate bootstrap_ci(const ResampleStat& stat, std::size_t n_rows, int replicates,
                              double level, std::uint64_t seed);

// Bonferroni-adjusted significance level: level / m.
double bonferroni(double level, std::size_t m);

// Two standard errors of a proportion: 2 * sqrt(p (1-p) / n).
double two_se(double p, std::size_t n);

ClassificationMetrics classification_metrics(std::span<const double> decisions,
                                             std::span<const double> outcomes);

} // namespace indist
