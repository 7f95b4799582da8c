#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "indist/error.hpp"
#include "indist/rng.hpp"
#include "indist/stats.hpp"

#include <cmath>
#include <vector>

using namespace indist;

namespace {

// independent oracle: slope of y on x from the 2x2 normal equations
double normal_equations_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const auto n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::vector<double> random_binary(Rng& rng, std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform() < 0.5 ? 0.0 : 1.0;
    return v;
}

} // namespace

TEST_CASE("mcc on canonical tables") {
    std::vector<double> a{1, 0, 1, 0};
    std::vector<double> b{1, 0, 1, 0};
    CHECK(mcc(a, b) == doctest::Approx(1.0));

    std::vector<double> inv{0, 1, 0, 1};
    CHECK(mcc(inv, b) == doctest::Approx(-1.0));

    // one of each tp/fp/tn/fn
    std::vector<double> pred{1, 1, 0, 0};
    std::vector<double> out{1, 0, 1, 0};
    CHECK(mcc(pred, out) == doctest::Approx(0.0));
}

TEST_CASE("mcc degenerate vectors return 0 with flag") {
    std::vector<double> c{1, 1, 1};
    std::vector<double> y{0, 1, 0};
    bool degenerate = false;
    CHECK(mcc(c, y, &degenerate) == 0.0);
    CHECK(degenerate);
}

TEST_CASE("mcc rejects non-binary and mismatched input") {
    std::vector<double> a{0.5, 1.0};
    std::vector<double> b{0, 1};
    CHECK_THROWS_AS((void)mcc(a, b), ConfigError);
    std::vector<double> c{0, 1, 1};
    CHECK_THROWS_AS((void)mcc(b, c), ConfigError);
}

TEST_CASE("mcc equals pearson correlation for non-constant binary vectors") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const auto a = random_binary(rng, 40);
        const auto b = random_binary(rng, 40);
        bool da = false, db = false;
        const double r = pearson(a, b, &da);
        const double m = mcc(a, b, &db);
        if (!da && !db) CHECK(std::abs(m - r) <= 1e-12);
    }
}

TEST_CASE("covariance basics") {
    std::vector<double> a{0, 1};
    std::vector<double> c{0.7, 0.7, 0.7};
    std::vector<double> y{0.1, 0.9, 0.4};
    CHECK(covariance(c, y) == doctest::Approx(0.0));
    CHECK(covariance(a, a) == doctest::Approx(0.25)); // means 0.5, denominator n
}

TEST_CASE("covariance ratio matches the least-squares slope oracle") {
    Rng rng(29);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<double> x(60), y(60);
        for (auto& v : x) v = rng.uniform();
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = 0.3 * x[i] + 0.2 * rng.uniform();
        const double slope = covariance(y, x) / covariance(x, x);
        CHECK(std::abs(slope - normal_equations_slope(x, y)) <= 1e-12);
    }
}

TEST_CASE("covariance is symmetric and affine-bilinear") {
    Rng rng(31);
    std::vector<double> a(50), b(50);
    for (auto& v : a) v = rng.uniform();
    for (auto& v : b) v = rng.uniform();
    CHECK(std::abs(covariance(a, b) - covariance(b, a)) <= 1e-12);

    const double c = 2.5, d = -0.7;
    std::vector<double> scaled(50);
    for (std::size_t i = 0; i < a.size(); ++i) scaled[i] = c * a[i] + d;
    CHECK(std::abs(covariance(scaled, b) - c * covariance(a, b)) <= 1e-12);
}

TEST_CASE("bootstrap_ci constant statistic collapses") {
    const auto stat = [](std::span<const std::size_t>) -> std::optional<double> { return 0.42; };
    const auto est = bootstrap_ci(stat, 10, 200, 0.95, 7);
    CHECK(est.point == 0.42);
    CHECK(est.lo == 0.42);
    CHECK(est.hi == 0.42);
    CHECK(est.missing == 0);
}

TEST_CASE("bootstrap_ci is reproducible and widens with the level") {
    std::vector<double> data{0.1, 0.4, 0.35, 0.8, 0.2, 0.9, 0.55, 0.3, 0.65, 0.05};
    const auto stat = [&](std::span<const std::size_t> idx) -> std::optional<double> {
        double s = 0.0;
        for (const std::size_t i : idx) s += data[i];
        return s / static_cast<double>(idx.size());
    };
    const auto a = bootstrap_ci(stat, data.size(), 500, 0.9, 123);
    const auto b = bootstrap_ci(stat, data.size(), 500, 0.9, 123);
    CHECK(a.point == b.point);
    CHECK(a.lo == b.lo);
    CHECK(a.hi == b.hi);

    const auto wide = bootstrap_ci(stat, data.size(), 500, 0.99, 123);
    CHECK(wide.lo <= a.lo);
    CHECK(wide.hi >= a.hi);
}

TEST_CASE("bootstrap_ci records missing replicates") {
    std::vector<double> data{0.0, 1.0, 1.0, 0.0, 1.0};
    // undefined whenever the resample is constant
    const auto stat = [&](std::span<const std::size_t> idx) -> std::optional<double> {
        double first = data[idx[0]];
        bool constant = true;
        double s = 0.0;
        for (const std::size_t i : idx) {
            constant &= data[i] == first;
            s += data[i];
        }
        if (constant) return std::nullopt;
        return s / static_cast<double>(idx.size());
    };
    const auto est = bootstrap_ci(stat, data.size(), 2000, 0.95, 5);
    CHECK(est.missing > 0);
    CHECK(est.missing < 2000);
}

TEST_CASE("bonferroni") {
    CHECK(bonferroni(0.05, 669) == doctest::Approx(0.05 / 669));
    CHECK(bonferroni(0.05, 1) == doctest::Approx(0.05));
    CHECK(bonferroni(0.05, 7) == doctest::Approx(0.05 / 7));
    CHECK_THROWS_AS((void)bonferroni(0.0, 3), ConfigError);
}

TEST_CASE("classification metrics") {
    std::vector<double> y{1, 1, 0, 0, 1};

    SUBCASE("perfect decisions") {
        const auto m = classification_metrics(y, y);
        CHECK(m.accuracy == 1.0);
        CHECK(*m.sensitivity == 1.0);
        CHECK(*m.specificity == 1.0);
    }
    SUBCASE("admit everyone") {
        std::vector<double> ones{1, 1, 1, 1, 1};
        const auto m = classification_metrics(ones, y);
        CHECK(m.fraction_positive == 1.0);
        CHECK(*m.sensitivity == 1.0);
        CHECK(*m.specificity == 0.0);
    }
    SUBCASE("no positives leaves sensitivity undefined") {
        std::vector<double> zeros{0, 0, 0, 0, 0};
        const auto m = classification_metrics(zeros, zeros);
        CHECK(!m.sensitivity.has_value());
        CHECK(m.accuracy == 1.0);
    }
    SUBCASE("accuracy identity") {
        std::vector<double> d{1, 0, 1, 0, 0};
        const auto m = classification_metrics(d, y);
        CHECK(m.accuracy ==
              static_cast<double>(m.counts.tp + m.counts.tn) / static_cast<double>(m.counts.total()));
        CHECK(m.counts.total() == y.size());
    }
}

TEST_CASE("two_se matches the binomial formula") {
    CHECK(two_se(0.5, 100) == doctest::Approx(2.0 * std::sqrt(0.25 / 100.0)));
}
