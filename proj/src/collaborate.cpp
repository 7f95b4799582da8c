#include "indist/collaborate.hpp"

#include "indist/error.hpp"
#include "indist/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace indist {

namespace {

struct LsFit {
    double intercept = 0.0;
    double slope = 0.0;
};

// Univariate least squares of y on x, population-covariance form; zero
// variance in x collapses to the mean of y.
LsFit least_squares(std::span<const double> x, std::span<const double> y) {
    const double vx = variance(x);
    if (vx == 0.0) return {mean(y), 0.0};
    const double slope = covariance(y, x) / vx;
    return {mean(y) - slope * mean(x), slope};
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Newton fit of p = sigmoid(a + b x) against y by log-loss. Returns false on
// separation or non-convergence.
bool fit_logistic(std::span<const double> x, std::span<const double> y, double& a, double& b) {
    constexpr int max_iter = 100;
    constexpr double tol = 1e-8;
    constexpr double coef_limit = 30.0; // diverging coefficients signal separation

    a = 0.0;
    b = 0.0;
    const auto n = static_cast<double>(x.size());
    for (int iter = 0; iter < max_iter; ++iter) {
        double g0 = 0.0;
        double g1 = 0.0;
        double h00 = 0.0;
        double h01 = 0.0;
        double h11 = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double p = sigmoid(a + b * x[i]);
            const double r = p - y[i];
            const double w = p * (1.0 - p);
            g0 += r;
            g1 += r * x[i];
            h00 += w;
            h01 += w * x[i];
            h11 += w * x[i] * x[i];
        }
        g0 /= n;
        g1 /= n;
        h00 /= n;
        h01 /= n;
        h11 /= n;
        const double det = h00 * h11 - h01 * h01;
        if (std::abs(det) < 1e-14) return false;
        const double da = (h11 * g0 - h01 * g1) / det;
        const double db = (h00 * g1 - h01 * g0) / det;
        a -= da;
        b -= db;
        if (!std::isfinite(a) || !std::isfinite(b) || std::abs(a) > coef_limit ||
            std::abs(b) > coef_limit)
            return false;
        if (std::abs(da) < tol && std::abs(db) < tol) return true;
    }
    return false;
}

std::vector<std::vector<std::size_t>> rows_by_cell(const Partition& p,
                                                   std::span<const std::size_t> cells,
                                                   std::size_t n_rows) {
    std::vector<std::vector<std::size_t>> out(p.cell_count() + 1); // + reserved
    for (std::size_t i = 0; i < n_rows; ++i) out[cells[i]].push_back(i);
    return out;
}

} // namespace

std::string to_string(ModelKind k) {
    switch (k) {
        case ModelKind::mean_only: return "mean_only";
        case ModelKind::linear: return "linear";
        case ModelKind::logistic: return "logistic";
    }
    return "?";
}

ModelKind model_kind_from_string(const std::string& s) {
    if (s == "mean_only") return ModelKind::mean_only;
    if (s == "linear") return ModelKind::linear;
    if (s == "logistic") return ModelKind::logistic;
    throw ConfigError("unknown model kind: " + s);
}

double SubsetModels::raw(std::size_t cell, double yhat) const {
    if (cell >= cells.size()) return global_mean;
    const auto& c = cells[cell];
    switch (kind) {
        case ModelKind::mean_only: return c.mean;
        case ModelKind::linear: return c.intercept + c.slope * yhat;
        case ModelKind::logistic:
            return c.logistic_fallback ? c.mean : sigmoid(c.log_a + c.log_b * yhat);
    }
    return global_mean;
}

double SubsetModels::predict(std::size_t cell, double yhat) const {
    return clamp01(raw(cell, yhat));
}

SubsetModels fit_subset_models(const Partition& p, const Dataset& train, ModelKind kind) {
    SubsetModels m;
    m.kind = kind;
    m.global_mean = mean(train.outcome);

    std::vector<double> ys;
    std::vector<double> yhats;
    for (const auto& cell : p.cells) {
        if (cell.train_rows.empty()) throw ConfigError("fit_subset_models: empty cell");
        ys.clear();
        yhats.clear();
        for (const std::size_t r : cell.train_rows) {
            ys.push_back(train.outcome[r]);
            yhats.push_back(train.expert[r]);
        }
        SubsetModels::CellModel cm;
        cm.n = cell.train_rows.size();
        cm.mean = mean(ys);
        const auto ls = least_squares(yhats, ys);
        cm.intercept = ls.intercept;
        cm.slope = ls.slope;
        if (kind == ModelKind::logistic) {
            if (variance(yhats) == 0.0 || !fit_logistic(yhats, ys, cm.log_a, cm.log_b))
                cm.logistic_fallback = true;
        }
        m.cells.push_back(cm);
    }
    return m;
}

double predict_collab(const SubsetModels& m, const Partition& p, std::span<const double> x,
                      double yhat) {
    if (yhat < 0.0 || yhat > 1.0) throw ConfigError("predict_collab: expert value outside [0,1]");
    return m.predict(p.assign(x), yhat);
}

CellTheoremCheck theorem1_check_cell(const SubsetModels& m, std::size_t cell,
                                     std::span<const std::size_t> rows, const Dataset& eval,
                                     const RegressionTree& comparator, double alpha_hat,
                                     double tol) {
    CellTheoremCheck c;
    c.cell = cell;
    c.n = rows.size();
    c.alpha_hat = alpha_hat;
    if (rows.empty()) return c;

    std::vector<double> ys;
    std::vector<double> yhats;
    std::vector<double> comp_preds;
    double mse_model = 0.0;
    double mse_comp = 0.0;
    for (const std::size_t r : rows) {
        const double y = eval.outcome[r];
        const double yhat = eval.expert[r];
        ys.push_back(y);
        yhats.push_back(yhat);
        const double dm = m.predict(cell, yhat) - y;
        mse_model += dm * dm;
        comp_preds.push_back(comparator.predict(eval.row(r)));
        const double dc = comp_preds.back() - y;
        mse_comp += dc * dc;
    }
    const auto n = static_cast<double>(rows.size());
    c.mse_model = mse_model / n;
    c.mse_comparator = mse_comp / n;
    c.cov = covariance(ys, yhats);
    c.lhs = c.mse_model + 4.0 * c.cov * c.cov;
    c.rhs = c.mse_comparator + 2.0 * alpha_hat;
    c.slack = c.rhs - c.lhs;
    c.holds = c.lhs <= c.rhs + tol;
    if (!c.holds && rows.size() >= 2) {
        c.comparator_cov = std::abs(covariance(comp_preds, ys));
        c.audit_underestimate = c.comparator_cov > alpha_hat + tol;
    }
    return c;
}

TheoremCheck theorem1_check(const SubsetModels& m, const Partition& p, const Dataset& eval,
                            const RegressionTree& comparator, const AuditReport& audit,
                            double tol) {
    if (audit.cells.size() != p.cell_count())
        throw ConfigError("theorem1_check: audit does not match the partition");

    const auto cells = p.assign_rows(eval);
    const auto groups = rows_by_cell(p, cells, eval.n_rows);

    TheoremCheck check;
    check.tol = tol;
    check.all_hold = true;
    for (std::size_t k = 0; k < p.cell_count(); ++k) {
        auto c = theorem1_check_cell(m, k, groups[k], eval, comparator,
                                     audit.cells[k].alpha_hat, tol);
        if (c.n > 0 && !c.holds) check.all_hold = false;
        check.cells.push_back(std::move(c));
    }
    return check;
}

std::vector<Certificate> theorem2_certificates(const Partition& p, const Dataset& ds, double alpha,
                                               int replicates, double level, std::uint64_t seed) {
    if (alpha <= 0.0) throw ConfigError("theorem2_certificates: alpha must be positive");
    const double threshold = std::sqrt(alpha / 2.0);

    std::vector<Certificate> out;
    for (std::size_t k = 0; k < p.cell_count(); ++k) {
        const auto& rows = p.cells[k].train_rows;
        Certificate cert;
        cert.cell = k;
        cert.size = rows.size();
        cert.threshold = threshold;
        if (rows.size() < 2) {
            out.push_back(std::move(cert));
            continue;
        }

        std::vector<double> ys;
        std::vector<double> yhats;
        for (const std::size_t r : rows) {
            ys.push_back(ds.outcome[r]);
            yhats.push_back(ds.expert[r]);
        }
        const auto stat = [&](std::span<const std::size_t> idx) -> std::optional<double> {
            std::vector<double> a(idx.size());
            std::vector<double> b(idx.size());
            for (std::size_t i = 0; i < idx.size(); ++i) {
                a[i] = ys[idx[i]];
                b[i] = yhats[idx[i]];
            }
            return std::abs(covariance(a, b));
        };
        cert.interval =
            bootstrap_ci(stat, rows.size(), replicates, level, derive_seed(seed, "certificate", k));
        cert.cov_abs = cert.interval.point;
        cert.fired = cert.interval.lo > threshold;
        out.push_back(std::move(cert));
    }
    return out;
}

CalibratedFeedback calibrate_feedback(std::span<const double> gh, std::span<const double> y) {
    if (gh.size() != y.size()) throw ConfigError("calibrate_feedback: length mismatch");
    if (gh.size() < 2) throw ConfigError("calibrate_feedback: need at least 2 rows");

    CalibratedFeedback out;
    const auto ls = least_squares(gh, y);
    out.gamma = ls.intercept;
    out.beta = ls.slope;
    out.values.reserve(gh.size());
    for (const double g : gh) out.values.push_back(clamp01(out.gamma + out.beta * g));
    return out;
}

void to_json(nlohmann::json& j, const SubsetModels& m) {
    j = nlohmann::json::object();
    j["kind"] = to_string(m.kind);
    j["global_mean"] = m.global_mean;
    auto cells = nlohmann::json::array();
    for (const auto& c : m.cells)
        cells.push_back({{"n", c.n},
                         {"mean", c.mean},
                         {"intercept", c.intercept},
                         {"slope", c.slope},
                         {"log_a", c.log_a},
                         {"log_b", c.log_b},
                         {"logistic_fallback", c.logistic_fallback}});
    j["cells"] = std::move(cells);
}

void from_json(const nlohmann::json& j, SubsetModels& m) {
    m.kind = model_kind_from_string(j.at("kind").get<std::string>());
    m.global_mean = j.at("global_mean").get<double>();
    m.cells.clear();
    for (const auto& c : j.at("cells")) {
        SubsetModels::CellModel cm;
        cm.n = c.at("n").get<std::size_t>();
        cm.mean = c.at("mean").get<double>();
        cm.intercept = c.at("intercept").get<double>();
        cm.slope = c.at("slope").get<double>();
        cm.log_a = c.at("log_a").get<double>();
        cm.log_b = c.at("log_b").get<double>();
        cm.logistic_fallback = c.at("logistic_fallback").get<bool>();
        m.cells.push_back(cm);
    }
}

} // namespace indist
