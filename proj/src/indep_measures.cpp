#include "catdist/indep_measures.hpp"

#include "catdist/error.hpp"

#include <cmath>
#include <limits>

namespace catdist {

namespace {

Matrix ones_off_diagonal(Index q) {
    const auto n = static_cast<Eigen::Index>(q);
    Matrix m = Matrix::Ones(n, n);
    m.diagonal().setZero();
    return m;
}

DeltaBlock block_for(const Schema& schema, Index j, Matrix values) {
    return make_block(j, schema[j].name, schema[j].levels, std::move(values));
}

void check_marginals(const Schema& schema, const MarginalTable& m) {
    if (m.n_variables() != schema.size()) throw UsageError("marginals do not match the schema");
    for (Index j = 0; j < schema.size(); ++j)
        if (m.counts[j].size() != schema[j].level_count())
            throw UsageError("marginals of '" + schema[j].name + "' do not match its level count");
}

// Unobserved levels have no frequency-based dissimilarity; mark them and fill NaN.
void mark_unobserved(DeltaBlock& block, const MarginalTable& m, Index j) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (Index a = 0; a < block.order(); ++a) {
        if (m.observed(j, static_cast<Code>(a))) continue;
        block.defined[a] = 0;
        block.values.row(static_cast<Eigen::Index>(a)).setConstant(nan);
        block.values.col(static_cast<Eigen::Index>(a)).setConstant(nan);
    }
}

BlockDiagonalDelta with_spec(BlockDiagonalDelta delta, Measure measure) {
    delta.spec.measure = measure;
    return delta;
}

}  // namespace

BlockDiagonalDelta build_matching(const Schema& schema) {
    BlockDiagonalDelta delta;
    for (Index j = 0; j < schema.size(); ++j)
        delta.blocks.push_back(block_for(schema, j, ones_off_diagonal(schema[j].level_count())));
    return with_spec(std::move(delta), Measure::Matching);
}

BlockDiagonalDelta build_eskin(const Schema& schema) {
    BlockDiagonalDelta delta;
    for (Index j = 0; j < schema.size(); ++j) {
        const double q = static_cast<double>(schema[j].level_count());
        delta.blocks.push_back(block_for(schema, j, ones_off_diagonal(schema[j].level_count()) * (2.0 / (q * q))));
    }
    return with_spec(std::move(delta), Measure::Eskin);
}

BlockDiagonalDelta build_lin(const Schema& schema, const MarginalTable& marginals, const LinGuard& guard) {
    check_marginals(schema, marginals);
    const double eps = guard.epsilon > 0.0 ? guard.epsilon : 1.0 / (2.0 * static_cast<double>(marginals.n));
    BlockDiagonalDelta delta;
    delta.spec.lin_guard = guard;
    for (Index j = 0; j < schema.size(); ++j) {
        const auto& p = marginals.of(j);
        const auto& counts = marginals.counts[j];
        const auto q = static_cast<Eigen::Index>(p.size());
        Matrix v = Matrix::Zero(q, q);
        bool clamped = false;
        for (Eigen::Index a = 0; a < q; ++a) {
            for (Eigen::Index b = a + 1; b < q; ++b) {
                if (counts[a] == 0 || counts[b] == 0) continue;
                double sum = p[a] + p[b];
                if (counts[a] + counts[b] == static_cast<std::int64_t>(marginals.n) || sum >= 1.0 - eps) {
                    if (!guard.enabled)
                        throw DomainError("lin: p_a + p_b = 1 for levels '" + schema[j].levels[a] + "' and '" +
                                          schema[j].levels[b] + "' of variable '" + schema[j].name +
                                          "' (log 1 = 0 in the denominator); enable the lin guard to clamp");
                    sum = std::min(sum, 1.0 - eps);
                    clamped = true;
                }
                const double ls = std::log(sum);
                const double d = (std::log(p[a]) + std::log(p[b]) - 2.0 * ls) / (2.0 * ls);
                v(a, b) = v(b, a) = d;
            }
        }
        if (clamped) delta.notes.push_back("lin: clamped p_a + p_b to 1 - " + std::to_string(eps) + " in variable '" + schema[j].name + "'");
        DeltaBlock block = block_for(schema, j, std::move(v));
        mark_unobserved(block, marginals, j);
        delta.blocks.push_back(std::move(block));
    }
    return with_spec(std::move(delta), Measure::Lin);
}

BlockDiagonalDelta build_iof(const Schema& schema, const MarginalTable& marginals) {
    check_marginals(schema, marginals);
    BlockDiagonalDelta delta;
    for (Index j = 0; j < schema.size(); ++j) {
        const auto& counts = marginals.counts[j];
        const auto q = static_cast<Eigen::Index>(counts.size());
        Matrix v = Matrix::Zero(q, q);
        for (Eigen::Index a = 0; a < q; ++a) {
            if (counts[a] == 1)
                delta.notes.push_back("iof: level '" + schema[j].levels[a] + "' of variable '" + schema[j].name +
                                      "' occurs once; its dissimilarities are 0");
            for (Eigen::Index b = a + 1; b < q; ++b) {
                if (counts[a] == 0 || counts[b] == 0) continue;
                v(a, b) = v(b, a) = std::log(static_cast<double>(counts[a])) * std::log(static_cast<double>(counts[b]));
            }
        }
        DeltaBlock block = block_for(schema, j, std::move(v));
        mark_unobserved(block, marginals, j);
        delta.blocks.push_back(std::move(block));
    }
    return with_spec(std::move(delta), Measure::Iof);
}

BlockDiagonalDelta build_of(const Schema& schema, const MarginalTable& marginals) {
    check_marginals(schema, marginals);
    BlockDiagonalDelta delta;
    for (Index j = 0; j < schema.size(); ++j) {
        const auto& p = marginals.of(j);
        const auto q = static_cast<Eigen::Index>(p.size());
        Matrix v = Matrix::Zero(q, q);
        for (Eigen::Index a = 0; a < q; ++a) {
            for (Eigen::Index b = a + 1; b < q; ++b) {
                if (p[a] == 0.0 || p[b] == 0.0) continue;
                v(a, b) = v(b, a) = std::log(1.0 / p[a]) * std::log(1.0 / p[b]);
            }
        }
        DeltaBlock block = block_for(schema, j, std::move(v));
        mark_unobserved(block, marginals, j);
        delta.blocks.push_back(std::move(block));
    }
    return with_spec(std::move(delta), Measure::Of);
}

BlockDiagonalDelta build_goodall(const Schema& schema, const MarginalTable& marginals, int variant) {
    if (variant < 1 || variant > 4) throw UsageError("goodall: variant must be 1, 2, 3 or 4");
    check_marginals(schema, marginals);
    const double n2 = static_cast<double>(marginals.n) * static_cast<double>(marginals.n);
    BlockDiagonalDelta delta;
    for (Index j = 0; j < schema.size(); ++j) {
        const auto& counts = marginals.counts[j];
        const auto& p = marginals.of(j);
        Matrix v = ones_off_diagonal(counts.size());
        for (Index a = 0; a < counts.size(); ++a) {
            double diag = 0.0;
            if (variant <= 2) {
                // Conditional sums in integer counts, so G1 + G2 = sum p^2 + p_a^2 holds exactly.
                std::int64_t s = 0;
                for (auto c : counts)
                    if (variant == 1 ? c <= counts[a] : c >= counts[a]) s += c * c;
                diag = static_cast<double>(s) / n2;
            } else if (variant == 3) {
                diag = p[a] * p[a];
            } else {
                diag = 1.0 - p[a] * p[a];
            }
            v(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a)) = diag;
        }
        DeltaBlock block = block_for(schema, j, std::move(v));
        block.zero_diagonal = false;
        mark_unobserved(block, marginals, j);
        delta.blocks.push_back(std::move(block));
    }
    static constexpr Measure kVariants[] = {Measure::Goodall1, Measure::Goodall2, Measure::Goodall3, Measure::Goodall4};
    return with_spec(std::move(delta), kVariants[variant - 1]);
}

BlockDiagonalDelta build_variability(const Schema& schema, const MarginalTable& marginals, Variability variant) {
    check_marginals(schema, marginals);
    BlockDiagonalDelta delta;
    for (Index j = 0; j < schema.size(); ++j) {
        const auto& p = marginals.of(j);
        const Index q = marginals.observed_levels(j);
        if (q < 2)
            throw DomainError(std::string(variant == Variability::Entropy ? "ve" : "vm") + ": variable '" +
                              schema[j].name + "' has a single observed level");
        double diag = 0.0;
        if (variant == Variability::Entropy) {
            double plogp = 0.0;
            for (double x : p)
                if (x > 0.0) plogp += x * std::log(x);
            diag = 1.0 + plogp / std::log(static_cast<double>(q));
        } else {
            double sq = 0.0;
            for (double x : p) sq += x * x;
            diag = 1.0 - (static_cast<double>(q) / static_cast<double>(q - 1)) * (1.0 - sq);
        }
        diag = std::max(0.0, diag);
        Matrix v = ones_off_diagonal(p.size());
        v.diagonal().setConstant(diag);
        DeltaBlock block = block_for(schema, j, std::move(v));
        block.zero_diagonal = false;
        mark_unobserved(block, marginals, j);
        delta.blocks.push_back(std::move(block));
    }
    return with_spec(std::move(delta), variant == Variability::Entropy ? Measure::Ve : Measure::Vm);
}

BlockDiagonalDelta build_ordered(const Schema& schema) {
    BlockDiagonalDelta delta;
    for (Index j = 0; j < schema.size(); ++j) {
        const Index q = schema[j].level_count();
        std::vector<double> s(q);
        if (schema[j].ordered_scores) {
            s = *schema[j].ordered_scores;
        } else {
            for (Index l = 0; l < q; ++l) s[l] = static_cast<double>(l);
        }
        bool up = true;
        bool down = true;
        for (Index l = 1; l < q; ++l) {
            up = up && s[l] >= s[l - 1];
            down = down && s[l] <= s[l - 1];
        }
        if (!up && !down)
            delta.notes.push_back("ordered: scores of variable '" + schema[j].name +
                                  "' are not monotone in level order; dissimilarities do not follow the order");
        Matrix v(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(q));
        for (Index a = 0; a < q; ++a)
            for (Index b = 0; b < q; ++b) v(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = std::abs(s[b] - s[a]);
        delta.blocks.push_back(block_for(schema, j, std::move(v)));
    }
    return with_spec(std::move(delta), Measure::Ordered);
}

}  // namespace catdist
