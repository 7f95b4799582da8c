#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "indist/dataset.hpp"
#include "indist/error.hpp"

#include "test_helpers.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <set>

using namespace indist;
using indist::testing::make_dataset;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& content) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path);
    out << content;
    return path;
}

ColumnSchema simple_schema() {
    ColumnSchema s;
    s.feature_cols = {"x0", "x1"};
    s.outcome_col = "y";
    s.expert_col = "yhat";
    return s;
}

} // namespace

TEST_CASE("load a small csv") {
    const auto path = write_temp("ds_small.csv",
                                 "x0,x1,y,yhat\n"
                                 "0,1,1,1\n"
                                 "1,0,0,0\n"
                                 "2,2,1,0\n");
    LoadReport rep;
    const auto ds = load_dataset(path, simple_schema(), &rep);
    CHECK(ds.n_rows == 3);
    CHECK(ds.n_features == 2);
    CHECK(rep.rows_dropped == 0);
    CHECK(ds.row(2)[1] == 2.0);
    CHECK(ds.row_ids[1] == "1");
}

TEST_CASE("triage-shaped file loads at full width") {
    // 3617 rows, nine discrete feature columns
    indist::Rng rng(123);
    std::ostringstream csv;
    ColumnSchema schema;
    for (int j = 0; j < 9; ++j) schema.feature_cols.push_back("f" + std::to_string(j));
    schema.outcome_col = "y";
    schema.expert_col = "yhat";
    for (const auto& c : schema.feature_cols) csv << c << ',';
    csv << "y,yhat\n";
    for (int i = 0; i < 3617; ++i) {
        for (int j = 0; j < 9; ++j) csv << rng.below(4) << ',';
        csv << rng.below(2) << ',' << rng.below(2) << '\n';
    }
    const auto path = write_temp("ds_triage.csv", csv.str());
    const auto ds = load_dataset(path, schema);
    CHECK(ds.n_rows == 3617);
    CHECK(ds.n_features == 9);
}

TEST_CASE("out-of-range outcome is an error") {
    const auto path = write_temp("ds_range.csv", "x0,x1,y,yhat\n0,1,2.0,1\n");
    CHECK_THROWS_AS((void)load_dataset(path, simple_schema()), ConfigError);
}

TEST_CASE("unknown column is an error") {
    const auto path = write_temp("ds_cols.csv", "x0,x1,y,yhat\n0,1,1,1\n");
    auto schema = simple_schema();
    schema.outcome_col = "nope";
    CHECK_THROWS_AS((void)load_dataset(path, schema), ConfigError);
}

TEST_CASE("missing file is an error") {
    CHECK_THROWS_AS((void)load_dataset("/nonexistent/file.csv", simple_schema()), ConfigError);
}

TEST_CASE("missing cells drop the row unless configured to fail") {
    const auto path = write_temp("ds_missing.csv",
                                 "x0,x1,y,yhat\n"
                                 "0,1,1,1\n"
                                 "1,,0,0\n"
                                 "2,2,1,0\n");
    LoadReport rep;
    const auto ds = load_dataset(path, simple_schema(), &rep);
    CHECK(ds.n_rows == 2);
    CHECK(rep.rows_dropped == 1);
    CHECK(ds.row_ids == std::vector<std::string>{"0", "2"}); // ids keep original positions

    auto strict = simple_schema();
    strict.error_on_missing = true;
    CHECK_THROWS_AS((void)load_dataset(path, strict), ConfigError);
}

TEST_CASE("all rows missing leaves an empty dataset error") {
    const auto path = write_temp("ds_empty.csv", "x0,x1,y,yhat\n,1,1,1\n");
    CHECK_THROWS_AS((void)load_dataset(path, simple_schema()), ConfigError);
}

TEST_CASE("split produces the documented sizes") {
    const auto ds = indist::testing::random_dataset(3617, 2, 99);

    SUBCASE("80/20 on 3617 rows") {
        const auto [train, test] = split_dataset(ds, {.train_fraction = 0.8, .seed = 1});
        CHECK(train.n_rows == 2893);
        CHECK(test.n_rows == 724);
    }
    SUBCASE("fraction 1.0 keeps everything in train") {
        const auto [train, test] = split_dataset(ds, {.train_fraction = 1.0, .seed = 1});
        CHECK(train.n_rows == 3617);
        CHECK(test.n_rows == 0);
    }
    SUBCASE("same seed twice gives identical id sequences") {
        const auto [a_train, a_test] = split_dataset(ds, {.train_fraction = 0.8, .seed = 7});
        const auto [b_train, b_test] = split_dataset(ds, {.train_fraction = 0.8, .seed = 7});
        CHECK(a_train.row_ids == b_train.row_ids);
        CHECK(a_test.row_ids == b_test.row_ids);
    }
    SUBCASE("split partitions the rows") {
        const auto [train, test] = split_dataset(ds, {.train_fraction = 0.8, .seed = 3});
        CHECK(train.n_rows + test.n_rows == ds.n_rows);
        std::set<std::string> seen;
        for (const auto& id : train.row_ids) seen.insert(id);
        for (const auto& id : test.row_ids) {
            CHECK(seen.count(id) == 0);
            seen.insert(id);
        }
        CHECK(seen.size() == ds.n_rows);
    }
}

TEST_CASE("invalid split fraction") {
    const auto ds = indist::testing::random_dataset(10, 1, 1);
    CHECK_THROWS_AS((void)split_dataset(ds, {.train_fraction = 0.0, .seed = 1}), ConfigError);
    CHECK_THROWS_AS((void)split_dataset(ds, {.train_fraction = 1.5, .seed = 1}), ConfigError);
}

TEST_CASE("save and reload round-trips every field") {
    auto ds = make_dataset(4, 2, {0, 1, 2, 3, 4, 5, 6, 7}, {0, 1, 0.25, 1}, {1, 0, 0.5, 1});
    ds.n_feedback = 1;
    ds.feedback = {0.1, 0.9, 0.5, 0.3};
    ds.feedback_names = {"note_score"};

    const auto path = std::filesystem::temp_directory_path() / "ds_roundtrip.csv";
    const auto schema = saved_schema(ds);
    save_dataset(ds, path, schema);
    const auto back = load_dataset(path, schema);
    CHECK(back == ds);
}

TEST_CASE("score_rule evaluates additive tables") {
    auto ds = make_dataset(2, 1, {0, 1}, {0, 0}, {0, 0});

    SUBCASE("zero table scores zero") {
        ScoreRule rule;
        rule.min_score = 0;
        rule.max_score = 23;
        rule.tables.push_back({"x0", {{0.0, 0}, {1.0, 0}}});
        CHECK(score_rule(ds, rule) == std::vector<int>{0, 0});
    }
    SUBCASE("table lookup") {
        ScoreRule rule;
        rule.min_score = 0;
        rule.max_score = 23;
        rule.tables.push_back({"x0", {{0.0, 0}, {1.0, 3}}});
        CHECK(score_rule(ds, rule) == std::vector<int>{0, 3});
    }
    SUBCASE("declared range is enforced") {
        ScoreRule rule;
        rule.min_score = 0;
        rule.max_score = 23;
        rule.tables.push_back({"x0", {{0.0, 0}, {1.0, 24}}});
        CHECK_THROWS_AS((void)score_rule(ds, rule), ConfigError);
    }
    SUBCASE("uncovered value is an error") {
        ScoreRule rule;
        rule.min_score = 0;
        rule.max_score = 23;
        rule.tables.push_back({"x0", {{0.0, 0}}});
        CHECK_THROWS_AS((void)score_rule(ds, rule), ConfigError);
    }
}

TEST_CASE("score_rule is monotone under pointwise-larger tables") {
    indist::Rng rng(17);
    auto ds = make_dataset(20, 2, {}, std::vector<double>(20, 0.0), std::vector<double>(20, 0.0));
    ds.features.resize(40);
    for (auto& v : ds.features) v = static_cast<double>(rng.below(4));

    ScoreRule rule;
    rule.min_score = 0;
    rule.max_score = 100;
    rule.tables.push_back({"x0", {{0.0, 1}, {1.0, 2}, {3.0, 4}}});
    rule.tables.push_back({"x1", {{1.0, 0}, {3.0, 5}}});
    const auto before = score_rule(ds, rule);

    auto bumped = rule;
    bumped.tables[1].bins[0].points += 3; // raise one bin
    const auto after = score_rule(ds, bumped);
    for (std::size_t i = 0; i < before.size(); ++i) CHECK(after[i] >= before[i]);
}

TEST_CASE("score rule config file parses") {
    const auto path = write_temp("rule.json", R"({
        "range": [0, 23],
        "features": [
            {"feature": "x0", "bins": [[0, 0], [1, 3]]},
            {"feature": "x1", "bins": [[5, 0], [100, 6]]}
        ]
    })");
    const auto rule = load_score_rule(path);
    CHECK(rule.max_score == 23);
    CHECK(rule.tables.size() == 2);
    CHECK(rule.tables[1].bins[1].points == 6);
}
