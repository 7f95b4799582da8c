#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "indist/error.hpp"
#include "indist/partition.hpp"
#include "indist/rng.hpp"
#include "indist/stats.hpp"

#include "test_helpers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

using namespace indist;
using indist::testing::make_dataset;
using indist::testing::random_dataset;

namespace {

// every cell nonempty, cells disjoint, union covers all rows
void check_partition_invariants(const Partition& p) {
    std::vector<bool> seen(p.n_train_rows, false);
    for (const auto& cell : p.cells) {
        CHECK(!cell.train_rows.empty());
        for (const std::size_t r : cell.train_rows) {
            CHECK(!seen[r]);
            seen[r] = true;
        }
    }
    CHECK(std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }));
}

// test-side oracle: max |Cov(stump(X), Y)| over every (feature, midpoint,
// leaf pair in {0,1}) stump, by direct mean computations
double brute_force_stump_cov(const Dataset& ds, std::span<const std::size_t> rows) {
    double best = 0.0;
    for (std::size_t j = 0; j < ds.n_features; ++j) {
        std::vector<double> values;
        for (const std::size_t r : rows) values.push_back(ds.row(r)[j]);
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        for (std::size_t k = 0; k + 1 < values.size(); ++k) {
            const double t = 0.5 * (values[k] + values[k + 1]);
            std::vector<double> f;
            std::vector<double> y;
            for (const std::size_t r : rows) {
                f.push_back(ds.row(r)[j] < t ? 0.0 : 1.0);
                y.push_back(ds.outcome[r]);
            }
            best = std::max(best, std::abs(covariance(f, y)));
        }
    }
    return best;
}

} // namespace

TEST_CASE("observational partition cell counts") {
    SUBCASE("all rows distinct") {
        const auto ds = make_dataset(4, 1, {0, 1, 2, 3}, {0, 1, 0, 1}, {0, 0, 1, 1});
        const auto p = observational_partition(ds);
        CHECK(p.cell_count() == 4);
        check_partition_invariants(p);
    }
    SUBCASE("all rows identical") {
        const auto ds = make_dataset(4, 2, {1, 2, 1, 2, 1, 2, 1, 2}, {0, 1, 0, 1}, {0, 0, 1, 1});
        const auto p = observational_partition(ds);
        CHECK(p.cell_count() == 1);
        CHECK(p.cells[0].train_rows.size() == 4);
    }
    SUBCASE("unseen vectors go to the reserved cell") {
        const auto ds = make_dataset(2, 1, {0, 1}, {0, 1}, {0, 1});
        const auto p = observational_partition(ds);
        std::vector<double> unseen{7.0};
        CHECK(p.assign(unseen) == p.reserved_index());
        std::vector<double> seen{1.0};
        CHECK(p.assign(seen) == 1);
    }
}

TEST_CASE("level set partition") {
    SUBCASE("unit bins over integer scores, one cell per observed value") {
        std::vector<double> scores{0, 3, 3, 7, 12, 0, 7};
        std::vector<double> edges;
        for (int e = 0; e <= 13; ++e) edges.push_back(e);
        const auto p = level_set_partition(scores, edges);
        CHECK(p.cell_count() == 4); // 0, 3, 7, 12 observed
        check_partition_invariants(p);
        CHECK(p.assign_score(3.0) == 1);
        CHECK(p.assign_score(12.0) == 3);
    }
    SUBCASE("width 0.1 bins plus singleton at 1") {
        std::vector<double> scores{0.05, 0.15, 0.95, 1.0, 1.0};
        const auto edges = default_unit_edges();
        const auto p = level_set_partition(scores, edges);
        CHECK(p.cell_count() == 4); // [0,.1), [.1,.2), [.9,1), {1}
        CHECK(p.cells[3].rule == "{1}");
        CHECK(p.cells[3].train_rows.size() == 2);
    }
    SUBCASE("score outside the covered range") {
        std::vector<double> scores{0.5, 1.5};
        const auto edges = default_unit_edges();
        CHECK_THROWS_AS((void)level_set_partition(scores, edges), ConfigError);
    }
    SUBCASE("empty bins route to the nearest occupied cell") {
        std::vector<double> scores{0.05, 0.95};
        const auto p = level_set_partition(scores, default_unit_edges());
        CHECK(p.cell_count() == 2);
        CHECK(p.assign_score(0.25) == 0); // bin 2 is closer to bin 0
        CHECK(p.assign_score(0.75) == 1);
    }
}

TEST_CASE("level set partition backed by a feature column is total") {
    const auto ds = make_dataset(4, 2, {0, 9, 1, 8, 2, 7, 5, 1}, {0, 1, 0, 1}, {0, 1, 1, 0});
    std::vector<double> edges{0, 1, 2, 3, 4, 5, 6};
    const auto p = level_set_partition_column(ds, 0, edges);
    CHECK(p.cell_count() == 4);
    std::vector<double> x{2.0, 0.0};
    CHECK(p.assign(x) == 2);
}

TEST_CASE("epsilon net partition") {
    SUBCASE("radius covering the whole diameter gives one cell") {
        const auto ds = random_dataset(30, 2, 4);
        const auto p = epsilon_net_partition(ds, Metric::euclidean, 10.0);
        CHECK(p.cell_count() == 1);
        check_partition_invariants(p);
    }
    SUBCASE("construction properties hold") {
        const auto ds = random_dataset(60, 3, 5);
        const double radius = 0.4;
        const auto p = epsilon_net_partition(ds, Metric::euclidean, radius);
        check_partition_invariants(p);
        // pairwise center distances exceed the radius
        for (std::size_t a = 0; a < p.centers.size(); ++a)
            for (std::size_t b = a + 1; b < p.centers.size(); ++b) {
                double d = 0.0;
                for (std::size_t j = 0; j < ds.n_features; ++j)
                    d += (p.centers[a][j] - p.centers[b][j]) * (p.centers[a][j] - p.centers[b][j]);
                CHECK(std::sqrt(d) > radius);
            }
        // every point lies within the radius of its assigned center
        for (std::size_t i = 0; i < ds.n_rows; ++i) {
            const std::size_t c = p.train_cells[i];
            double d = 0.0;
            for (std::size_t j = 0; j < ds.n_features; ++j)
                d += (ds.row(i)[j] - p.centers[c][j]) * (ds.row(i)[j] - p.centers[c][j]);
            CHECK(std::sqrt(d) <= radius);
        }
    }
    SUBCASE("hamming metric on discrete data") {
        const auto ds = make_dataset(4, 2, {0, 0, 0, 1, 1, 0, 1, 1}, {0, 1, 0, 1}, {0, 0, 1, 1});
        const auto p = epsilon_net_partition(ds, Metric::hamming, 1.0);
        CHECK(p.cell_count() == 2); // (0,0) covers (0,1),(1,0); (1,1) opens its own
    }
}

// sampled L-Lipschitz probes stay weakly correlated with Y inside the cells
// of a (4 alpha / L)-net
TEST_CASE("epsilon net bounds probe covariance") {
    const double alpha = 0.05;
    const double lipschitz = 1.0;
    const double radius = 4.0 * alpha / lipschitz;
    const auto ds = random_dataset(400, 4, 12);
    const auto p = epsilon_net_partition(ds, Metric::euclidean, radius);

    Rng rng(900);
    for (int probe = 0; probe < 40; ++probe) {
        // random direction with euclidean norm L, random offset, clamped
        std::vector<double> w(ds.n_features);
        double norm = 0.0;
        for (auto& v : w) {
            v = rng.normal();
            norm += v * v;
        }
        norm = std::sqrt(norm);
        for (auto& v : w) v = v * lipschitz / norm;
        const double b = rng.uniform();

        for (const auto& cell : p.cells) {
            if (cell.train_rows.size() < 2) continue;
            std::vector<double> f;
            std::vector<double> y;
            for (const std::size_t r : cell.train_rows) {
                double z = b;
                for (std::size_t j = 0; j < ds.n_features; ++j) z += w[j] * ds.row(r)[j];
                f.push_back(clamp01(z));
                y.push_back(ds.outcome[r]);
            }
            CHECK(std::abs(covariance(f, y)) <= alpha + 0.02);
        }
    }
}

TEST_CASE("boosting leaves independent outcomes alone") {
    Rng rng(77);
    const std::size_t n = 600;
    std::vector<double> features(n);
    std::vector<double> outcome(n);
    for (auto& v : features) v = static_cast<double>(rng.below(5));
    for (auto& v : outcome) v = rng.uniform() < 0.5 ? 0.0 : 1.0; // independent of x
    const auto ds = make_dataset(n, 1, std::move(features), std::move(outcome),
                                 std::vector<double>(n, 0.0));

    const auto edges = default_unit_edges();
    const auto res = boost_multicalibrated(ds, {.max_depth = 1, .min_leaf = 1}, 0.05, edges, 50, 100);
    CHECK(res.converged);
    CHECK(res.partition.cell_count() == 1);
    CHECK(res.predictor.base == doctest::Approx(mean(ds.outcome)));
    check_partition_invariants(res.partition);
}

TEST_CASE("boosting recovers a planted stump") {
    // real-valued outcome equal to a stump on feature 0
    Rng rng(31);
    const std::size_t n = 500;
    std::vector<double> features;
    std::vector<double> outcome;
    for (std::size_t i = 0; i < n; ++i) {
        const double x0 = rng.uniform();
        const double x1 = rng.uniform();
        features.push_back(x0);
        features.push_back(x1);
        outcome.push_back(x0 < 0.6 ? 0.2 : 0.8);
    }
    const auto ds =
        make_dataset(n, 2, std::move(features), std::move(outcome), std::vector<double>(n, 0.0));

    const double alpha = 0.01;
    const auto edges = default_unit_edges();
    const OracleSpec oracle{.max_depth = 1, .min_leaf = 5};
    const auto res = boost_multicalibrated(ds, oracle, alpha, edges, 20, 100);
    CHECK(res.converged);

    // within every occupied bin, h comes within alpha^2 of the exhaustive stump
    std::vector<std::vector<std::size_t>> bins(level_bin_count(edges));
    for (std::size_t i = 0; i < n; ++i) {
        const double hv = res.predictor.evaluate(ds.row(i));
        bins[*level_bin_of(hv, edges)].push_back(i);
    }
    for (const auto& rows : bins) {
        if (rows.empty()) continue;
        std::vector<double> xs;
        std::vector<double> ys;
        std::vector<double> hs;
        for (const std::size_t r : rows) {
            xs.push_back(ds.row(r)[0]);
            xs.push_back(ds.row(r)[1]);
            ys.push_back(ds.outcome[r]);
            hs.push_back(res.predictor.evaluate(ds.row(r)));
        }
        const MatrixView view{xs.data(), rows.size(), 2};
        const auto stump = exhaustive_best_tree(view, ys, oracle);
        const double stump_mse = tree_mse(stump, view, ys);
        double h_mse = 0.0;
        for (std::size_t k = 0; k < rows.size(); ++k) h_mse += (hs[k] - ys[k]) * (hs[k] - ys[k]);
        h_mse /= static_cast<double>(rows.size());
        CHECK(h_mse - stump_mse < alpha * alpha);
    }
}

TEST_CASE("boosting bookkeeping invariants") {
    const auto gen = [](std::uint64_t seed) {
        Rng rng(seed);
        const std::size_t n = 800;
        std::vector<double> features;
        std::vector<double> outcome;
        for (std::size_t i = 0; i < n; ++i) {
            const double a = static_cast<double>(rng.below(3));
            const double b = static_cast<double>(rng.below(3));
            features.push_back(a);
            features.push_back(b);
            const double p = 0.15 + 0.2 * a + 0.15 * b;
            outcome.push_back(rng.uniform() < p ? 1.0 : 0.0);
        }
        return make_dataset(n, 2, std::move(features), std::move(outcome),
                            std::vector<double>(n, 0.0));
    };

    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto ds = gen(seed);
        const double alpha = 0.02;
        const auto edges = default_unit_edges();
        const OracleSpec oracle{.max_depth = 1, .min_leaf = 5};
        const auto res = boost_multicalibrated(ds, oracle, alpha, edges, 30, 100);
        check_partition_invariants(res.partition);

        // total training MSE never increases across rounds
        for (std::size_t r = 1; r < res.round_mse.size(); ++r)
            CHECK(res.round_mse[r] <= res.round_mse[r - 1] + 1e-12);

        // every accepted update improved its bin by at least alpha^2
        for (const double imp : res.update_improvements)
            CHECK(imp >= alpha * alpha - 1e-9);

        // replaying the patch history reproduces the fitted values
        REQUIRE(res.converged);
        std::vector<double> h(ds.n_rows);
        for (std::size_t i = 0; i < ds.n_rows; ++i) {
            h[i] = res.predictor.evaluate(ds.row(i));
            CHECK(h[i] >= 0.0);
            CHECK(h[i] <= 1.0);
        }

        // converged: no occupied bin with >= min_cell rows can improve by alpha^2
        std::vector<std::vector<std::size_t>> bins(level_bin_count(edges));
        for (std::size_t i = 0; i < ds.n_rows; ++i)
            bins[*level_bin_of(h[i], edges)].push_back(i);
        for (const auto& rows : bins) {
            if (rows.size() < 30) continue;
            std::vector<double> xs;
            std::vector<double> ys;
            for (const std::size_t r : rows) {
                xs.push_back(ds.row(r)[0]);
                xs.push_back(ds.row(r)[1]);
                ys.push_back(ds.outcome[r]);
            }
            const MatrixView view{xs.data(), rows.size(), 2};
            const auto refit = fit_tree(view, ys, oracle);
            double h_mse = 0.0;
            for (std::size_t k = 0; k < rows.size(); ++k) {
                const double d = h[rows[k]] - ys[k];
                h_mse += d * d;
            }
            h_mse /= static_cast<double>(rows.size());
            CHECK(h_mse - tree_mse(refit, view, ys) < alpha * alpha + 1e-9);
        }
    }
}

TEST_CASE("audit on tiny cells matches brute force stump enumeration") {
    for (std::uint64_t seed = 200; seed < 230; ++seed) {
        Rng rng(seed);
        const std::size_t n = 4 + rng.index(17); // up to 20 rows
        auto ds = random_dataset(n, 3, seed);
        // binary outcomes half the time to also hit discrete targets
        if (seed % 2 == 0)
            for (auto& y : ds.outcome) y = y < 0.5 ? 0.0 : 1.0;

        Partition p;
        p.kind = PartitionKind::observational;
        p.n_features = ds.n_features;
        p.n_train_rows = n;
        std::vector<std::size_t> rows(n);
        std::iota(rows.begin(), rows.end(), std::size_t{0});
        p.cells.push_back({"all", rows});
        p.train_cells.assign(n, 0);

        const auto report = audit_partition(p, ds, {.max_depth = 1, .min_leaf = 1}, 0, seed);
        REQUIRE(report.cells.size() == 1);
        CHECK(report.cells[0].exact);
        const double oracle_value = brute_force_stump_cov(ds, rows);
        CHECK(std::abs(report.cells[0].alpha_hat - oracle_value) <= 1e-12);
    }
}

TEST_CASE("audit conventions") {
    SUBCASE("depth 0 class has zero covariance") {
        const auto ds = random_dataset(40, 2, 8);
        const auto p = observational_partition(ds);
        const auto report = audit_partition(p, ds, {.max_depth = 0, .min_leaf = 1}, 5, 1);
        for (const auto& cell : report.cells) CHECK(cell.alpha_hat == 0.0);
    }
    SUBCASE("cell reproduced exactly by a stump reaches Var(Y)") {
        // y = indicator(x0 >= 0.5): best stump covariance is Var(y)
        const auto base = random_dataset(100, 1, 9);
        std::vector<double> y(base.n_rows);
        for (std::size_t i = 0; i < base.n_rows; ++i) y[i] = base.row(i)[0] >= 0.5 ? 1.0 : 0.0;
        auto ds = base;
        ds.outcome = y;

        Partition p;
        p.kind = PartitionKind::observational;
        p.n_features = 1;
        p.n_train_rows = ds.n_rows;
        std::vector<std::size_t> rows(ds.n_rows);
        std::iota(rows.begin(), rows.end(), std::size_t{0});
        p.cells.push_back({"all", rows});
        p.train_cells.assign(ds.n_rows, 0);

        const auto report = audit_partition(p, ds, {.max_depth = 1, .min_leaf = 1}, 0, 1);
        CHECK(report.cells[0].alpha_hat == doctest::Approx(variance(ds.outcome)).epsilon(1e-12));
    }
    SUBCASE("cells below two rows are flagged with zero alpha") {
        const auto ds = make_dataset(1, 1, {0.5}, {1}, {1});
        const auto p = observational_partition(ds);
        const auto report = audit_partition(p, ds, {.max_depth = 1, .min_leaf = 1}, 3, 1);
        CHECK(report.cells[0].small);
        CHECK(report.cells[0].alpha_hat == 0.0);
    }
    SUBCASE("alpha_hat stays within [0, 0.25] and grows with the probe set") {
        const auto ds = random_dataset(120, 3, 33);
        const auto res =
            boost_multicalibrated(ds, {.max_depth = 2, .min_leaf = 5}, 0.05, default_unit_edges(), 30, 50);
        const OracleSpec deep{.max_depth = 2, .min_leaf = 5};
        const auto few = audit_partition(res.partition, ds, deep, 4, 77);
        const auto many = audit_partition(res.partition, ds, deep, 16, 77);
        for (std::size_t k = 0; k < few.cells.size(); ++k) {
            CHECK(few.cells[k].alpha_hat >= 0.0);
            CHECK(few.cells[k].alpha_hat <= 0.25);
            CHECK(many.cells[k].alpha_hat >= few.cells[k].alpha_hat);
        }
    }
}

TEST_CASE("partition json round trip") {
    SUBCASE("observational") {
        const auto ds = random_dataset(25, 2, 14);
        const auto p = observational_partition(ds);
        nlohmann::json j;
        to_json(j, p);
        Partition back;
        from_json(j, back);
        CHECK(back.cell_count() == p.cell_count());
        for (std::size_t i = 0; i < ds.n_rows; ++i) CHECK(back.assign(ds.row(i)) == p.train_cells[i]);
    }
    SUBCASE("boosted") {
        Rng rng(3);
        const std::size_t n = 400;
        std::vector<double> f;
        std::vector<double> y;
        for (std::size_t i = 0; i < n; ++i) {
            const double a = static_cast<double>(rng.below(4));
            f.push_back(a);
            y.push_back(rng.uniform() < 0.2 + 0.2 * a ? 1.0 : 0.0);
        }
        const auto ds = make_dataset(n, 1, std::move(f), std::move(y), std::vector<double>(n, 0.0));
        const auto res =
            boost_multicalibrated(ds, {.max_depth = 1, .min_leaf = 5}, 0.02, default_unit_edges(), 20, 50);
        nlohmann::json j;
        to_json(j, res.partition);
        Partition back;
        from_json(j, back);
        for (std::size_t i = 0; i < ds.n_rows; ++i)
            CHECK(back.assign(ds.row(i)) == res.partition.train_cells[i]);
    }
}
