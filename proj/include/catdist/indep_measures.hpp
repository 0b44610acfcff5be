#pragma once

#include "catdist/cooccur.hpp"
#include "catdist/dataset.hpp"
#include "catdist/delta.hpp"

#include <vector>

namespace catdist {

// Independent (association-free) category dissimilarities. Each block depends
// on one variable only: on nothing but its level count (matching, eskin,
// ordered) or on its marginal frequencies. Logarithms are natural throughout;
// Lin is a ratio of logs and so base-free anyway.

using Schema = std::vector<VariableSchema>;

/// 1 off the diagonal, 0 on it.
BlockDiagonalDelta build_matching(const Schema& schema);

/// 2 / q_j^2 off the diagonal.
BlockDiagonalDelta build_eskin(const Schema& schema);

/// [log p_a + log p_b - 2 log(p_a + p_b)] / [2 log(p_a + p_b)].
/// p_a + p_b = 1 (possible for two-level variables) is a DomainError unless the
/// guard is on, in which case the sum is clamped to 1 - epsilon first.
BlockDiagonalDelta build_lin(const Schema& schema, const MarginalTable& marginals, const LinGuard& guard = {});

/// log(n p_a) log(n p_b), i.e. the product of log counts.
BlockDiagonalDelta build_iof(const Schema& schema, const MarginalTable& marginals);

/// log(1 / p_a) log(1 / p_b).
BlockDiagonalDelta build_of(const Schema& schema, const MarginalTable& marginals);

/// Off-diagonal 1; diagonal per variant:
///   1: sum of p_l^2 over p_l <= p_a    2: sum of p_l^2 over p_l >= p_a
///   3: p_a^2                           4: 1 - p_a^2
BlockDiagonalDelta build_goodall(const Schema& schema, const MarginalTable& marginals, int variant);

enum class Variability { Entropy, Mutability };

/// Off-diagonal 1; diagonal 1 minus the normalised entropy (VE) or normalised
/// Gini index (VM) of the variable. Needs at least two observed levels.
BlockDiagonalDelta build_variability(const Schema& schema, const MarginalTable& marginals, Variability variant);

/// |s_b - s_a| with s the ordered scores of the variable (level index by default).
/// Non-monotone scores are reported in `notes`, not rejected.
BlockDiagonalDelta build_ordered(const Schema& schema);

}  // namespace catdist
