#include "indist/synth.hpp"

#include "indist/error.hpp"
#include "indist/rng.hpp"
#include "indist/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace indist {

namespace {

struct Table {
    std::vector<int> cards;
    std::size_t n_combos = 1;

    std::vector<int> combo(std::size_t index) const {
        std::vector<int> x(cards.size());
        for (std::size_t j = 0; j < cards.size(); ++j) {
            x[j] = static_cast<int>(index % static_cast<std::size_t>(cards[j]));
            index /= static_cast<std::size_t>(cards[j]);
        }
        return x;
    }
};

int planted_threshold(int card0) { return card0 / 2; }

// integer level of a combo; base risk is a function of the level only
int level_of(const SynthConfig& cfg, const std::vector<int>& x) {
    switch (cfg.structure) {
        case SynthStructure::planted_stump:
            return x[0] >= planted_threshold(cfg.cardinalities[0]) ? 1 : 0;
        case SynthStructure::additive: {
            int s = 0;
            for (const int v : x) s += v;
            return s;
        }
        case SynthStructure::conditional_independence: return std::min(x[0], 3);
    }
    return 0;
}

int level_count(const SynthConfig& cfg) {
    switch (cfg.structure) {
        case SynthStructure::planted_stump: return cfg.cardinalities[0] > 1 ? 2 : 1;
        case SynthStructure::additive: {
            int s = 0;
            for (const int c : cfg.cardinalities) s += c - 1;
            return s + 1;
        }
        case SynthStructure::conditional_independence: return std::min(cfg.cardinalities[0], 4);
    }
    return 1;
}

double base_of_level(const SynthConfig& cfg, int level, int n_levels) {
    switch (cfg.structure) {
        case SynthStructure::planted_stump: {
            const auto [lo, hi] = cfg.base_levels.value_or(std::pair{0.25, 0.65});
            return level == 0 ? lo : hi;
        }
        case SynthStructure::additive:
            if (n_levels <= 1) return 0.5;
            return 0.15 + 0.7 * static_cast<double>(level) / static_cast<double>(n_levels - 1);
        case SynthStructure::conditional_independence: {
            constexpr double levels[4] = {0.2, 0.4, 0.6, 0.8};
            return levels[level];
        }
    }
    return 0.5;
}

double outcome_prob(const SynthConfig& cfg, double base, int u) {
    if (cfg.structure == SynthStructure::conditional_independence) return base;
    return clamp01(base + cfg.side_info_strength * (static_cast<double>(u) - 0.5) * cfg.scale);
}

// expert's pre-noise call: the side bit in the informed cell, the
// thresholded base risk elsewhere
int expert_raw(const SynthConfig& cfg, double base, int level, int informed_level, int u) {
    if (cfg.structure == SynthStructure::conditional_independence) return u;
    if (cfg.side_info_strength > 0.0 && level == informed_level) return u;
    return base >= 0.5 ? 1 : 0;
}

ScoreRule planted_rule(const SynthConfig& cfg) {
    ScoreRule rule;
    rule.min_score = 0;
    rule.max_score = level_count(cfg) - 1;
    switch (cfg.structure) {
        case SynthStructure::planted_stump: {
            ScoreRule::FeatureTable t;
            t.feature = "x0";
            const int thr = planted_threshold(cfg.cardinalities[0]);
            if (cfg.cardinalities[0] > 1) {
                t.bins.push_back({static_cast<double>(thr - 1), 0});
                t.bins.push_back({static_cast<double>(cfg.cardinalities[0] - 1), 1});
            } else {
                t.bins.push_back({0.0, 0});
            }
            rule.tables.push_back(std::move(t));
            break;
        }
        case SynthStructure::additive:
            for (std::size_t j = 0; j < cfg.cardinalities.size(); ++j) {
                ScoreRule::FeatureTable t;
                t.feature = "x" + std::to_string(j);
                for (int v = 0; v < cfg.cardinalities[j]; ++v)
                    t.bins.push_back({static_cast<double>(v), v});
                rule.tables.push_back(std::move(t));
            }
            break;
        case SynthStructure::conditional_independence: {
            ScoreRule::FeatureTable t;
            t.feature = "x0";
            const int levels = level_count(cfg);
            for (int v = 0; v < levels - 1; ++v) t.bins.push_back({static_cast<double>(v), v});
            t.bins.push_back({static_cast<double>(cfg.cardinalities[0] - 1), levels - 1});
            rule.tables.push_back(std::move(t));
            break;
        }
    }
    return rule;
}

} // namespace

std::string to_string(SynthStructure s) {
    switch (s) {
        case SynthStructure::planted_stump: return "planted_stump";
        case SynthStructure::additive: return "additive";
        case SynthStructure::conditional_independence: return "conditional_independence";
    }
    return "?";
}

SynthStructure synth_structure_from_string(const std::string& s) {
    if (s == "planted_stump") return SynthStructure::planted_stump;
    if (s == "additive") return SynthStructure::additive;
    if (s == "conditional_independence") return SynthStructure::conditional_independence;
    throw ConfigError("unknown synth structure: " + s);
}

SynthResult generate(const SynthConfig& cfg) {
    if (cfg.n == 0) throw ConfigError("synth: n must be >= 1");
    if (cfg.cardinalities.empty()) throw ConfigError("synth: need at least one feature");
    for (const int c : cfg.cardinalities)
        if (c < 1) throw ConfigError("synth: cardinalities must be >= 1");
    if (cfg.side_info_strength < 0.0 || cfg.side_info_strength > 1.0)
        throw ConfigError("synth: side_info_strength must lie in [0,1]");
    if (cfg.expert_noise < 0.0 || cfg.expert_noise > 1.0)
        throw ConfigError("synth: expert_noise must lie in [0,1]");

    Table table;
    table.cards = cfg.cardinalities;
    for (const int c : cfg.cardinalities) {
        table.n_combos *= static_cast<std::size_t>(c);
        if (table.n_combos > 1000000) throw ConfigError("synth: feature table too large");
    }

    const int n_levels = level_count(cfg);
    const double combo_mass = 1.0 / static_cast<double>(table.n_combos);

    // level masses determine the informed cell (largest mass, lowest index)
    std::vector<double> level_mass(static_cast<std::size_t>(n_levels), 0.0);
    for (std::size_t c = 0; c < table.n_combos; ++c)
        level_mass[static_cast<std::size_t>(level_of(cfg, table.combo(c)))] += combo_mass;
    const int informed_level = static_cast<int>(
        std::max_element(level_mass.begin(), level_mass.end()) - level_mass.begin());

    // exact per-level moments and the exact joint of (Y, Yhat) from the table
    std::vector<double> ey(static_cast<std::size_t>(n_levels), 0.0);
    std::vector<double> eyhat(static_cast<std::size_t>(n_levels), 0.0);
    std::vector<double> eyyhat(static_cast<std::size_t>(n_levels), 0.0);
    double py1 = 0.0;
    double pyhat1 = 0.0;
    double p11 = 0.0;
    const double nu = cfg.expert_noise;
    for (std::size_t c = 0; c < table.n_combos; ++c) {
        const auto x = table.combo(c);
        const auto lev = static_cast<std::size_t>(level_of(cfg, x));
        const double base = base_of_level(cfg, static_cast<int>(lev), n_levels);
        for (int u = 0; u < 2; ++u) {
            const double w = combo_mass * 0.5;
            const double p = outcome_prob(cfg, base, u);
            const int raw = expert_raw(cfg, base, static_cast<int>(lev), informed_level, u);
            const double e_yh = raw == 1 ? 1.0 - nu : nu;
            ey[lev] += w * p;
            eyhat[lev] += w * e_yh;
            eyyhat[lev] += w * p * e_yh; // Y and the noise flip are independent given (X, U)
            py1 += w * p;
            pyhat1 += w * e_yh;
            p11 += w * p * e_yh;
        }
    }

    SynthResult res;
    auto& ds = res.data;
    ds.n_rows = cfg.n;
    ds.n_features = cfg.cardinalities.size();
    for (std::size_t j = 0; j < ds.n_features; ++j)
        ds.feature_names.push_back("x" + std::to_string(j));

    auto& truth = res.truth;
    truth.p_row.reserve(cfg.n);

    Rng rng(derive_seed(cfg.seed, "synth"));
    std::vector<int> x(ds.n_features);
    for (std::size_t i = 0; i < cfg.n; ++i) {
        for (std::size_t j = 0; j < ds.n_features; ++j) {
            x[j] = static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.cardinalities[j])));
            ds.features.push_back(static_cast<double>(x[j]));
        }
        const int u = static_cast<int>(rng.below(2));
        const int lev = level_of(cfg, x);
        const double base = base_of_level(cfg, lev, n_levels);
        const double p = outcome_prob(cfg, base, u);
        const int y = rng.uniform() < p ? 1 : 0;
        const int raw = expert_raw(cfg, base, lev, informed_level, u);
        const bool flip = rng.uniform() < nu;
        const int yhat = flip ? 1 - raw : raw;

        ds.outcome.push_back(static_cast<double>(y));
        ds.expert.push_back(static_cast<double>(yhat));
        ds.row_ids.push_back(std::to_string(i));
        truth.p_row.push_back(p);
    }

    // planted partition: level sets of the base risk, scored by a rule so
    // assignment stays total for new inputs
    std::vector<double> edges;
    for (int v = 0; v <= n_levels; ++v) edges.push_back(static_cast<double>(v));
    truth.planted = level_set_partition_rule(ds, planted_rule(cfg), edges);

    // per-cell exact values for the occupied levels, in cell order
    std::vector<int> occupied;
    for (std::size_t k = 0; k < truth.planted.cell_count(); ++k) {
        const std::size_t row = truth.planted.cells[k].train_rows.front();
        occupied.push_back(level_of(cfg, [&] {
            std::vector<int> xi(ds.n_features);
            for (std::size_t j = 0; j < ds.n_features; ++j)
                xi[j] = static_cast<int>(ds.row(row)[j]);
            return xi;
        }()));
    }
    for (const int lev : occupied) {
        const auto l = static_cast<std::size_t>(lev);
        const double mass = level_mass[l];
        const double m_y = ey[l] / mass;
        const double m_yh = eyhat[l] / mass;
        truth.exact_mass.push_back(mass);
        truth.exact_ymean.push_back(m_y);
        truth.exact_cov.push_back(eyyhat[l] / mass - m_y * m_yh);
    }
    const auto informed_it = std::find(occupied.begin(), occupied.end(), informed_level);
    truth.informed_cell = informed_it == occupied.end()
                              ? truth.planted.cell_count()
                              : static_cast<std::size_t>(informed_it - occupied.begin());

    if (py1 <= 0.0 || py1 >= 1.0 || pyhat1 <= 0.0 || pyhat1 >= 1.0) {
        truth.exact_mcc = 0.0; // degenerate marginal
    } else {
        truth.exact_mcc =
            (p11 - py1 * pyhat1) / std::sqrt(py1 * (1.0 - py1) * pyhat1 * (1.0 - pyhat1));
    }
    return res;
}

void to_json(nlohmann::json& j, const SynthConfig& cfg) {
    j = nlohmann::json::object();
    j["n"] = cfg.n;
    j["cardinalities"] = cfg.cardinalities;
    j["side_info_strength"] = cfg.side_info_strength;
    j["expert_noise"] = cfg.expert_noise;
    j["structure"] = to_string(cfg.structure);
    j["seed"] = cfg.seed;
    j["scale"] = cfg.scale;
    if (cfg.base_levels)
        j["base_levels"] = {cfg.base_levels->first, cfg.base_levels->second};
}

void from_json(const nlohmann::json& j, SynthConfig& cfg) {
    cfg = SynthConfig{};
    cfg.n = j.at("n").get<std::size_t>();
    cfg.cardinalities = j.at("cardinalities").get<std::vector<int>>();
    if (j.contains("side_info_strength")) cfg.side_info_strength = j["side_info_strength"].get<double>();
    if (j.contains("expert_noise")) cfg.expert_noise = j["expert_noise"].get<double>();
    cfg.structure = synth_structure_from_string(j.at("structure").get<std::string>());
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("scale")) cfg.scale = j["scale"].get<double>();
    if (j.contains("base_levels"))
        cfg.base_levels = std::pair{j["base_levels"].at(0).get<double>(),
                                    j["base_levels"].at(1).get<double>()};
}

void to_json(nlohmann::json& j, const SynthTruth& t) {
    j = nlohmann::json::object();
    j["p_row"] = t.p_row;
    nlohmann::json jp;
    to_json(jp, t.planted);
    j["planted_partition"] = std::move(jp);
    j["exact_cov"] = t.exact_cov;
    j["exact_mass"] = t.exact_mass;
    j["exact_ymean"] = t.exact_ymean;
    j["informed_cell"] = t.informed_cell;
    j["exact_mcc"] = t.exact_mcc;
}

} // namespace indist
