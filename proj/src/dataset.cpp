#include "indist/dataset.hpp"

#include "indist/error.hpp"
#include "indist/rng.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace indist {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (const char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

// missing cell: empty, "NA", "nan" (any case)
bool cell_missing(const std::string& s) {
    if (s.empty()) return true;
    std::string low;
    for (const char c : s) low += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return low == "na" || low == "nan" || low == "null";
}

double parse_cell(const std::string& s, const std::string& col, std::size_t line_no) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        if (!std::isfinite(v)) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("line " + std::to_string(line_no) + ": cannot parse value '" + s +
                          "' in column '" + col + "'");
    }
}

Dataset take_rows(const Dataset& ds, std::span<const std::size_t> rows) {
    Dataset out;
    out.n_rows = rows.size();
    out.n_features = ds.n_features;
    out.n_feedback = ds.n_feedback;
    out.feature_names = ds.feature_names;
    out.feedback_names = ds.feedback_names;
    out.features.reserve(rows.size() * ds.n_features);
    out.feedback.reserve(rows.size() * ds.n_feedback);
    for (const std::size_t r : rows) {
        const auto row = ds.row(r);
        out.features.insert(out.features.end(), row.begin(), row.end());
        if (ds.n_feedback > 0) {
            const auto fb = ds.feedback_row(r);
            out.feedback.insert(out.feedback.end(), fb.begin(), fb.end());
        }
        out.outcome.push_back(ds.outcome[r]);
        out.expert.push_back(ds.expert[r]);
        out.row_ids.push_back(ds.row_ids[r]);
    }
    return out;
}

} // namespace

std::size_t Dataset::feature_index(const std::string& name) const {
    const auto it = std::find(feature_names.begin(), feature_names.end(), name);
    if (it == feature_names.end()) throw ConfigError("unknown feature column '" + name + "'");
    return static_cast<std::size_t>(it - feature_names.begin());
}

Dataset load_dataset(const std::filesystem::path& path, const ColumnSchema& schema,
                     LoadReport* report) {
    if (schema.feature_cols.empty()) throw ConfigError("schema needs at least one feature column");
    if (schema.outcome_col.empty() || schema.expert_col.empty())
        throw ConfigError("schema needs an outcome column and an expert column");

    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open dataset file: " + path.string());

    std::string header_line;
    if (!std::getline(in, header_line)) throw ConfigError("empty file: " + path.string());
    const auto header = split_csv_line(header_line);

    const auto col_index = [&](const std::string& name) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end())
            throw ConfigError("unknown column '" + name + "' in " + path.string());
        return static_cast<std::size_t>(it - header.begin());
    };

    std::vector<std::size_t> feat_idx;
    for (const auto& c : schema.feature_cols) feat_idx.push_back(col_index(c));
    const std::size_t outcome_idx = col_index(schema.outcome_col);
    const std::size_t expert_idx = col_index(schema.expert_col);
    std::vector<std::size_t> fb_idx;
    for (const auto& c : schema.feedback_cols) fb_idx.push_back(col_index(c));
    const bool has_id = !schema.id_col.empty();
    const std::size_t id_idx = has_id ? col_index(schema.id_col) : 0;

    Dataset ds;
    ds.n_features = feat_idx.size();
    ds.n_feedback = fb_idx.size();
    ds.feature_names = schema.feature_cols;
    ds.feedback_names = schema.feedback_cols;

    LoadReport rep;
    std::string line;
    std::size_t line_no = 1;
    std::size_t data_row = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw ConfigError("line " + std::to_string(line_no) + ": expected " +
                              std::to_string(header.size()) + " cells, got " +
                              std::to_string(cells.size()));

        bool missing = false;
        for (const std::size_t i : feat_idx) missing |= cell_missing(cells[i]);
        for (const std::size_t i : fb_idx) missing |= cell_missing(cells[i]);
        missing |= cell_missing(cells[outcome_idx]) || cell_missing(cells[expert_idx]);
        if (missing) {
            if (schema.error_on_missing)
                throw ConfigError("line " + std::to_string(line_no) + ": missing value");
            ++rep.rows_dropped;
            ++data_row;
            continue;
        }

        for (std::size_t k = 0; k < feat_idx.size(); ++k)
            ds.features.push_back(parse_cell(cells[feat_idx[k]], header[feat_idx[k]], line_no));
        const double y = parse_cell(cells[outcome_idx], schema.outcome_col, line_no);
        const double yhat = parse_cell(cells[expert_idx], schema.expert_col, line_no);
        if (y < 0.0 || y > 1.0)
            throw ConfigError("line " + std::to_string(line_no) + ": outcome value " +
                              format_double(y) + " outside [0,1]");
        if (yhat < 0.0 || yhat > 1.0)
            throw ConfigError("line " + std::to_string(line_no) + ": expert value " +
                              format_double(yhat) + " outside [0,1]");
        ds.outcome.push_back(y);
        ds.expert.push_back(yhat);
        for (std::size_t k = 0; k < fb_idx.size(); ++k)
            ds.feedback.push_back(parse_cell(cells[fb_idx[k]], header[fb_idx[k]], line_no));
        ds.row_ids.push_back(has_id ? cells[id_idx] : std::to_string(data_row));
        ++data_row;
        ++rep.rows_kept;
    }
    ds.n_rows = rep.rows_kept;
    if (ds.n_rows == 0) throw ConfigError("dataset is empty after filtering: " + path.string());
    if (report) *report = rep;
    return ds;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path, const ColumnSchema& schema) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write dataset file: " + path.string());

    out << (schema.id_col.empty() ? std::string("row_id") : schema.id_col);
    for (const auto& c : schema.feature_cols) out << ',' << c;
    out << ',' << schema.outcome_col << ',' << schema.expert_col;
    for (const auto& c : schema.feedback_cols) out << ',' << c;
    out << '\n';

    for (std::size_t i = 0; i < ds.n_rows; ++i) {
        out << ds.row_ids[i];
        for (const double v : ds.row(i)) out << ',' << format_double(v);
        out << ',' << format_double(ds.outcome[i]) << ',' << format_double(ds.expert[i]);
        if (ds.n_feedback > 0)
            for (const double v : ds.feedback_row(i)) out << ',' << format_double(v);
        out << '\n';
    }
}

ColumnSchema saved_schema(const Dataset& ds) {
    ColumnSchema s;
    s.feature_cols = ds.feature_names;
    if (s.feature_cols.empty())
        for (std::size_t j = 0; j < ds.n_features; ++j) s.feature_cols.push_back("x" + std::to_string(j));
    s.outcome_col = "y";
    s.expert_col = "yhat";
    s.feedback_cols = ds.feedback_names;
    s.id_col = "row_id";
    return s;
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& ds, const SplitSpec& spec) {
    if (spec.train_fraction <= 0.0 || spec.train_fraction > 1.0)
        throw ConfigError("train_fraction must be in (0,1]");

    std::vector<std::size_t> order(ds.n_rows);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(spec.seed, "split"));
    for (std::size_t i = ds.n_rows; i > 1; --i) { // Fisher-Yates
        const std::size_t j = rng.index(i);
        std::swap(order[i - 1], order[j]);
    }

    // tiny nudge absorbs representation error of the fraction (0.7 * 10 -> 7)
    const auto train_n = static_cast<std::size_t>(
        std::floor(spec.train_fraction * static_cast<double>(ds.n_rows) + 1e-9));
    const std::span<const std::size_t> all(order);
    return {take_rows(ds, all.subspan(0, train_n)), take_rows(ds, all.subspan(train_n))};
}

ScoreRule load_score_rule(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open score rule file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError("bad score rule file " + path.string() + ": " + e.what());
    }
    ScoreRule rule;
    try {
        rule.min_score = j.at("range").at(0).get<int>();
        rule.max_score = j.at("range").at(1).get<int>();
        for (const auto& t : j.at("features")) {
            ScoreRule::FeatureTable ft;
            ft.feature = t.at("feature").get<std::string>();
            for (const auto& b : t.at("bins"))
                ft.bins.push_back({b.at(0).get<double>(), b.at(1).get<int>()});
            rule.tables.push_back(std::move(ft));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("bad score rule file " + path.string() + ": " + e.what());
    }
    return rule;
}

int score_row(std::span<const double> x, const std::vector<std::string>& feature_names,
              const ScoreRule& rule) {
    int total = 0;
    for (const auto& table : rule.tables) {
        const auto it = std::find(feature_names.begin(), feature_names.end(), table.feature);
        if (it == feature_names.end())
            throw ConfigError("score rule references unknown feature '" + table.feature + "'");
        const double v = x[static_cast<std::size_t>(it - feature_names.begin())];
        bool covered = false;
        for (const auto& bin : table.bins) {
            if (v <= bin.upper) {
                total += bin.points;
                covered = true;
                break;
            }
        }
        if (!covered)
            throw ConfigError("feature '" + table.feature + "' value " + format_double(v) +
                              " not covered by any score bin");
    }
    return total;
}

std::vector<int> score_rule(const Dataset& ds, const ScoreRule& rule) {
    std::vector<int> scores(ds.n_rows);
    for (std::size_t i = 0; i < ds.n_rows; ++i) {
        const int s = score_row(ds.row(i), ds.feature_names, rule);
        if (s < rule.min_score || s > rule.max_score)
            throw ConfigError("row " + ds.row_ids[i] + " scores " + std::to_string(s) +
                              ", outside declared range [" + std::to_string(rule.min_score) + "," +
                              std::to_string(rule.max_score) + "]");
        scores[i] = s;
    }
    return scores;
}

} // namespace indist
