#pragma once

// Test-only helpers: random instance generators and independent oracles that
// evaluate each scalar formula directly, without going through the library's
// block builders.

#include "catdist/dataset.hpp"
#include "catdist/random.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace catdist::testing {

// Random dataset in which every level of every variable occurs at least once
// (the first q_j rows cycle through the levels, the rest are uniform).
inline CategoricalDataset random_dataset(Rng& rng, Index n, const std::vector<Index>& levels) {
    std::vector<VariableSchema> vars;
    std::vector<std::vector<Code>> codes;
    for (Index j = 0; j < levels.size(); ++j) {
        VariableSchema v;
        v.name = "v" + std::to_string(j);
        for (Index l = 0; l < levels[j]; ++l) v.levels.push_back("l" + std::to_string(l));
        std::vector<Code> col(n);
        for (Index i = 0; i < n; ++i) col[i] = static_cast<Code>(i < levels[j] ? i : rng.below(levels[j]));
        // Shuffle so the guaranteed occurrences are not always the first rows.
        rng.shuffle(std::span<Code>(col));
        vars.push_back(std::move(v));
        codes.push_back(std::move(col));
    }
    return CategoricalDataset(std::move(vars), std::move(codes));
}

inline CategoricalDataset random_dataset(Rng& rng, Index n, Index q_max_vars, Index q_max_levels) {
    const Index nvars = 1 + rng.below(q_max_vars);
    std::vector<Index> levels(nvars);
    for (auto& l : levels) l = 1 + rng.below(q_max_levels);
    return random_dataset(rng, n, levels);
}

inline std::vector<double> random_distribution(Rng& rng, Index q, double zero_prob = 0.0) {
    std::vector<double> p(q);
    double s = 0.0;
    for (auto& x : p) {
        x = rng.uniform01() < zero_prob ? 0.0 : rng.uniform01() + 1e-3;
        s += x;
    }
    if (s == 0.0) {
        p[rng.below(q)] = 1.0;
        return p;
    }
    for (auto& x : p) x /= s;
    return p;
}

namespace oracle {

inline double lin(double pa, double pb) {
    return (std::log(pa) + std::log(pb) - 2.0 * std::log(pa + pb)) / (2.0 * std::log(pa + pb));
}

inline double iof(double n, double pa, double pb) { return std::log(n * pa) * std::log(n * pb); }

inline double of(double pa, double pb) { return std::log(pa) * std::log(pb); }

inline double goodall1_diag(const std::vector<double>& p, Index a) {
    double s = 0.0;
    for (double x : p)
        if (x <= p[a]) s += x * x;
    return s;
}

inline double goodall2_diag(const std::vector<double>& p, Index a) {
    double s = 0.0;
    for (double x : p)
        if (x >= p[a]) s += x * x;
    return s;
}

inline double ve_diag(const std::vector<double>& p) {
    double h = 0.0;
    for (double x : p)
        if (x > 0) h -= x * std::log(x);
    return 1.0 - h / std::log(static_cast<double>(p.size()));
}

inline double vm_diag(const std::vector<double>& p) {
    double g = 1.0;
    for (double x : p) g -= x * x;
    const double q = static_cast<double>(p.size());
    return 1.0 - q / (q - 1.0) * g;
}

inline double tvd(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (Index l = 0; l < a.size(); ++l) s += std::fabs(a[l] - b[l]);
    return s / 2.0;
}

inline double kl(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (Index l = 0; l < a.size(); ++l) s += a[l] * std::log2(a[l] / b[l]) + b[l] * std::log2(b[l] / a[l]);
    return s;
}

inline double chisq(const std::vector<double>& a, const std::vector<double>& b, const std::vector<double>& p) {
    double s = 0.0;
    for (Index l = 0; l < a.size(); ++l) s += (a[l] - b[l]) * (a[l] - b[l]) / p[l];
    return s;
}

// Conditional distribution of variable j given level a of variable i, by counting rows.
inline std::vector<double> profile(const CategoricalDataset& ds, Index i, Code a, Index j) {
    std::vector<double> r(ds.level_count(j), 0.0);
    double n = 0.0;
    for (Index row = 0; row < ds.n_rows(); ++row) {
        if (ds.code(row, i) != a) continue;
        r[ds.code(row, j)] += 1.0;
        n += 1.0;
    }
    for (auto& x : r) x /= n;
    return r;
}

inline std::vector<double> marginal(const CategoricalDataset& ds, Index j) {
    std::vector<double> p(ds.level_count(j), 0.0);
    for (Index row = 0; row < ds.n_rows(); ++row) p[ds.code(row, j)] += 1.0;
    for (auto& x : p) x /= static_cast<double>(ds.n_rows());
    return p;
}

}  // namespace oracle

}  // namespace catdist::testing
