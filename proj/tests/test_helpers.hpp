#pragma once

#include "indist/dataset.hpp"
#include "indist/rng.hpp"

#include <string>
#include <vector>

namespace indist::testing {

// In-memory dataset from row-major features plus outcome/expert vectors.
inline Dataset make_dataset(std::size_t n, std::size_t d, std::vector<double> features,
                            std::vector<double> outcome, std::vector<double> expert) {
    Dataset ds;
    ds.n_rows = n;
    ds.n_features = d;
    ds.features = std::move(features);
    ds.outcome = std::move(outcome);
    ds.expert = std::move(expert);
    for (std::size_t i = 0; i < n; ++i) ds.row_ids.push_back(std::to_string(i));
    for (std::size_t j = 0; j < d; ++j) ds.feature_names.push_back("x" + std::to_string(j));
    return ds;
}

inline Dataset random_dataset(std::size_t n, std::size_t d, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> features(n * d);
    std::vector<double> outcome(n);
    std::vector<double> expert(n);
    for (auto& v : features) v = rng.uniform();
    for (auto& v : outcome) v = rng.uniform();
    for (auto& v : expert) v = rng.uniform();
    return make_dataset(n, d, std::move(features), std::move(outcome), std::move(expert));
}

} // namespace indist::testing
