#pragma once

#include "catdist/dataset.hpp"
#include "catdist/random.hpp"

#include <string>
#include <vector>

namespace catdist::testing {

// Three balanced classes; "s1" and "s2" copy the class except that 5% of
// their cells are redrawn uniformly; "n1" and "n2" are pure noise.
struct Fixture {
    CategoricalDataset predictors;
    Labeling labels;
};

inline Fixture class_fixture(Index n = 500, std::uint64_t seed = 2024) {
    Rng rng(seed);
    const std::vector<std::string> classes{"A", "B", "C"};
    std::vector<Code> cls(n);
    for (Index i = 0; i < n; ++i) cls[i] = static_cast<Code>(i % 3);
    rng.shuffle(std::span<Code>(cls));

    std::vector<VariableSchema> vars;
    std::vector<std::vector<Code>> codes;
    for (const char* name : {"s1", "s2"}) {
        vars.push_back({name, {"a", "b", "c"}, std::nullopt});
        std::vector<Code> col(n);
        for (Index i = 0; i < n; ++i) col[i] = rng.uniform01() < 0.05 ? static_cast<Code>(rng.below(3)) : cls[i];
        codes.push_back(std::move(col));
    }
    for (const char* name : {"n1", "n2"}) {
        vars.push_back({name, {"w", "x", "y", "z"}, std::nullopt});
        std::vector<Code> col(n);
        for (auto& c : col) c = static_cast<Code>(rng.below(4));
        codes.push_back(std::move(col));
    }
    return {CategoricalDataset(std::move(vars), std::move(codes)), Labeling{cls, classes}};
}

}  // namespace catdist::testing
