#include "indist/stats.hpp"

#include "indist/error.hpp"
#include "indist/rng.hpp"
#include "indist/util.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace indist {

namespace {

void check_equal_length(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ConfigError("vector length mismatch");
    if (a.empty()) throw ConfigError("empty vectors");
}

bool is_binary(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0 || x == 1.0; });
}

} // namespace

double covariance(std::span<const double> a, std::span<const double> b) {
    check_equal_length(a, b);
    const double ma = mean(a);
    const double mb = mean(b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - ma) * (b[i] - mb);
    return s / static_cast<double>(a.size());
}

double variance(std::span<const double> a) { return covariance(a, a); }

double pearson(std::span<const double> a, std::span<const double> b, bool* degenerate) {
    check_equal_length(a, b);
    const double va = variance(a);
    const double vb = variance(b);
    if (va == 0.0 || vb == 0.0) {
        if (degenerate) *degenerate = true;
        return 0.0;
    }
    if (degenerate) *degenerate = false;
    return covariance(a, b) / std::sqrt(va * vb);
}

double mcc(std::span<const double> pred, std::span<const double> outcome, bool* degenerate) {
    check_equal_length(pred, outcome);
    if (!is_binary(pred) || !is_binary(outcome)) throw ConfigError("mcc requires binary 0/1 vectors");
    return pearson(pred, outcome, degenerate);
}

IntervalEstimate bootstrap_ci(const ResampleStat& stat, std::size_t n_rows, int replicates,
                              double level, std::uint64_t seed) {
    if (n_rows == 0) throw ConfigError("bootstrap_ci: no rows");
    if (replicates < 1) throw ConfigError("bootstrap_ci: replicates must be >= 1");
    if (level <= 0.0 || level >= 1.0) throw ConfigError("bootstrap_ci: level must be in (0,1)");

    std::vector<std::size_t> identity(n_rows);
    std::iota(identity.begin(), identity.end(), std::size_t{0});
    const auto point = stat(identity);
    if (!point) throw NumericError("bootstrap_ci: statistic undefined on the full sample");

    IntervalEstimate est;
    est.point = *point;
    est.level = level;
    est.replicates = replicates;
    est.seed = seed;

    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(replicates));
    std::vector<std::size_t> idx(n_rows);
    for (int r = 0; r < replicates; ++r) {
        Rng rng(derive_seed(seed, "bootstrap", static_cast<std::uint64_t>(r)));
        for (auto& i : idx) i = rng.index(n_rows);
        if (const auto v = stat(idx)) {
            values.push_back(*v);
        } else {
            ++est.missing;
        }
    }
    if (values.empty()) throw NumericError("bootstrap_ci: statistic undefined on every resample");

    std::sort(values.begin(), values.end());
    const auto m = static_cast<double>(values.size());
    // nearest-rank percentile: the q-th percentile replicate
    const auto rank = [&](double q) {
        const auto k = static_cast<long>(std::ceil(q * m)) - 1;
        return values[static_cast<std::size_t>(std::clamp<long>(k, 0, static_cast<long>(values.size()) - 1))];
    };
    const double q_lo = (1.0 - level) / 2.0;
    est.lo = rank(q_lo);
    est.hi = rank(1.0 - q_lo);
    return est;
}

double bonferroni(double level, std::size_t m) {
    if (level <= 0.0 || level >= 1.0) throw ConfigError("bonferroni: level must be in (0,1)");
    if (m == 0) throw ConfigError("bonferroni: m must be positive");
    return level / static_cast<double>(m);
}

double two_se(double p, std::size_t n) {
    if (n == 0) throw ConfigError("two_se: n must be positive");
    return 2.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

ClassificationMetrics classification_metrics(std::span<const double> decisions,
                                             std::span<const double> outcomes) {
    check_equal_length(decisions, outcomes);
    if (!is_binary(decisions) || !is_binary(outcomes))
        throw ConfigError("classification_metrics requires binary 0/1 vectors");

    ClassificationMetrics m;
    for (std::size_t i = 0; i < decisions.size(); ++i) {
        const bool d = decisions[i] == 1.0;
        const bool y = outcomes[i] == 1.0;
        if (d && y) ++m.counts.tp;
        else if (d && !y) ++m.counts.fp;
        else if (!d && y) ++m.counts.fn;
        else ++m.counts.tn;
    }
    const auto n = static_cast<double>(decisions.size());
    m.fraction_positive = static_cast<double>(m.counts.tp + m.counts.fp) / n;
    m.accuracy = static_cast<double>(m.counts.tp + m.counts.tn) / n;
    if (m.counts.tp + m.counts.fn > 0)
        m.sensitivity = static_cast<double>(m.counts.tp) / static_cast<double>(m.counts.tp + m.counts.fn);
    if (m.counts.tn + m.counts.fp > 0)
        m.specificity = static_cast<double>(m.counts.tn) / static_cast<double>(m.counts.tn + m.counts.fp);
    return m;
}

} // namespace indist
