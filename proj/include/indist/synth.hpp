#pragma once

#include "indist/dataset.hpp"
#include "indist/partition.hpp"

#include <cstdint>
#include <optional>
#include <vector>

#include "json.hpp"

namespace indist {

enum class SynthStructure { planted_stump, additive, conditional_independence };

std::string to_string(SynthStructure s);
SynthStructure synth_structure_from_string(const std::string& s);

// Seeded generator of categorical datasets with a known generative table.
// Features are independent and uniform over their cardinalities; a latent
// Bernoulli(1/2) side bit U shifts the outcome probability by
// side_info_strength * (U - 1/2) * scale. The expert observes U inside the
// informed cell (all cells under conditional_independence never use U for
// the outcome), and thresholds the base risk elsewhere; expert_noise flips
// the prediction. Generation is a pure function of the config.
struct SynthConfig {
    std::size_t n = 1000;
    std::vector<int> cardinalities = {3, 3, 3};
    double side_info_strength = 0.0; // in [0,1]
    double expert_noise = 0.0;       // in [0,1]
    SynthStructure structure = SynthStructure::planted_stump;
    std::uint64_t seed = 0;
    double scale = 0.8; // keeps p within [0.05, 0.95] at full strength
    std::optional<std::pair<double, double>> base_levels; // planted_stump override
};

// Exact moments computed by summing the finite generative table, so derived
// oracles are closed-form rather than Monte Carlo.
struct SynthTruth {
    std::vector<double> p_row;       // per-row E[Y | X, U]
    Partition planted;               // level sets of the base risk
    std::vector<double> exact_cov;   // per planted cell, Cov(Y, Yhat)
    std::vector<double> exact_mass;  // per planted cell, P(X in cell)
    std::vector<double> exact_ymean; // per planted cell, E[Y]
    std::size_t informed_cell = 0;   // expert uses U here when strength > 0
    double exact_mcc = 0.0;          // exact MCC(Yhat, Y) of the table
};

struct SynthResult {
    Dataset data;
    SynthTruth truth;
};

SynthResult generate(const SynthConfig& cfg);

void to_json(nlohmann::json& j, const SynthConfig& cfg);
void from_json(const nlohmann::json& j, SynthConfig& cfg);

// Ground-truth sidecar persisted next to the CSV.
void to_json(nlohmann::json& j, const SynthTruth& t);

} // namespace indist
