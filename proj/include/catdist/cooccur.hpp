#pragma once

#include "catdist/dataset.hpp"
#include "catdist/types.hpp"

#include <vector>

namespace catdist {

/// Per-variable relative frequencies p_j (the diagonal of P_d), kept with the
/// integer counts they were derived from.
struct MarginalTable {
    Index n = 0;
    std::vector<std::vector<std::int64_t>> counts;
    std::vector<std::vector<double>> proportions;

    const std::vector<double>& of(Index j) const { return proportions.at(j); }
    Index n_variables() const { return proportions.size(); }
    bool observed(Index j, Code level) const { return counts[j][level] > 0; }
    /// Number of levels of variable j that occur at least once.
    Index observed_levels(Index j) const;
};

/// Conditional distributions of variable `target` given each level of `source`
/// (block R^ij). Rows of unobserved source levels hold NaN.
struct ProfileBlock {
    Index source = 0;
    Index target = 0;
    Matrix rows;
    std::vector<std::uint8_t> defined;  // per source level

    bool row_defined(Code a) const { return defined[a] != 0; }
};

struct CooccurrenceOptions {
    // Reject datasets with unobserved levels instead of flagging them.
    bool strict = false;
};

/// P, P_d and R of a dataset. Joint counts are stored for i < j only; profile
/// blocks exist for every ordered pair.
class CooccurrenceModel {
public:
    const MarginalTable& marginals() const { return marginals_; }
    const std::vector<double>& marginals(Index j) const { return marginals_.of(j); }
    Index n_variables() const { return marginals_.n_variables(); }
    Index n() const { return marginals_.n; }

    /// Block R^ij; i == j is an error.
    const ProfileBlock& profile(Index i, Index j) const;
    /// Joint proportions block of P for (i, j), i != j; (j, i) is returned transposed.
    Matrix joint(Index i, Index j) const;
    CountMatrix joint_counts(Index i, Index j) const;

    bool has_unobserved() const { return has_unobserved_; }
    std::uint64_t source_fingerprint() const { return fingerprint_; }

    friend CooccurrenceModel build_cooccurrence(const CategoricalDataset& ds, const CooccurrenceOptions& options);

private:
    Index pair_slot(Index i, Index j) const;

    MarginalTable marginals_;
    std::vector<CountMatrix> pair_counts_;   // upper triangle, row-major over (i < j)
    std::vector<ProfileBlock> profiles_;     // Q*(Q-1) ordered pairs
    bool has_unobserved_ = false;
    std::uint64_t fingerprint_ = 0;
};

CooccurrenceModel build_cooccurrence(const CategoricalDataset& ds, const CooccurrenceOptions& options = {});

/// Marginals only; enough for the independent measures.
MarginalTable build_marginals(const CategoricalDataset& ds);

}  // namespace catdist
