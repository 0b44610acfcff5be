#pragma once

#include "catdist/dataset.hpp"
#include "catdist/delta.hpp"
#include "catdist/types.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace catdist {

/// What to do when a row uses a level that Delta has no data for (a test
/// category absent from the training rows).
enum class UnseenPolicy {
    Error,
    // Fill the level's row and column with the block's largest defined
    // off-diagonal value, diagonal 0.
    Max,
};

struct DistanceOptions {
    UnseenPolicy unseen = UnseenPolicy::Error;
    unsigned threads = 1;
};

struct DistanceMatrix {
    Matrix values;
    bool symmetric = false;
    bool zero_diagonal = false;
    std::string measure;
    std::uint64_t delta_source = 0;
    std::uint64_t row_source = 0;
    std::uint64_t col_source = 0;

    Index rows() const { return static_cast<Index>(values.rows()); }
    Index cols() const { return static_cast<Index>(values.cols()); }
    double operator()(Index i, Index j) const {
        return values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
};

/// D[i, i'] = sum_j Delta_j[code_j(i), code_j(i')], the gather form of Z Delta Z'.
/// O(n^2 Q) time, no indicator matrix is formed.
DistanceMatrix pairwise_distances(const CategoricalDataset& ds, const BlockDiagonalDelta& delta,
                                  const DistanceOptions& options = {});

/// n_a x n_b distances between two datasets sharing Delta's schema (Z_a Delta Z_b').
DistanceMatrix cross_distances(const CategoricalDataset& a, const CategoricalDataset& b,
                               const BlockDiagonalDelta& delta, const DistanceOptions& options = {});

/// Materialises Z and evaluates Z Delta Z' with dense products. Test oracle; refuses n > 2000.
DistanceMatrix naive_pairwise_dense(const CategoricalDataset& ds, const BlockDiagonalDelta& delta);

/// (D + D') / 2.
DistanceMatrix symmetrize(const DistanceMatrix& d);

/// Delta with undefined levels filled per `policy` (Error throws if any level
/// used by `used` is undefined). Blocks are returned unchanged when fully defined.
BlockDiagonalDelta resolve_unseen(const BlockDiagonalDelta& delta, const std::vector<const CategoricalDataset*>& used,
                                  UnseenPolicy policy);

struct BlockMetricReport {
    Index variable = 0;
    std::string name;
    bool zero_diagonal = true;
    bool symmetric = true;
    Index triangle_violations = 0;
    double worst_violation = 0.0;

    bool metric() const { return zero_diagonal && symmetric && triangle_violations == 0; }
};

struct MetricReport {
    std::vector<BlockMetricReport> blocks;

    bool zero_diagonal() const;
    bool symmetric() const;
    bool triangle() const;
    bool metric() const { return zero_diagonal() && symmetric() && triangle(); }
};

/// Per block: zero self-dissimilarity, symmetry, and every (a, b, c) triple
/// checked for delta_ac <= delta_ab + delta_bc. Undefined levels are skipped.
MetricReport check_metric_properties(const BlockDiagonalDelta& delta, double tolerance = 1e-12);

void write_distance_csv(std::ostream& out, const DistanceMatrix& d, const std::vector<std::string>& row_ids = {},
                        const std::vector<std::string>& col_ids = {});

// Binary layout, little-endian: "CATDISTM", u64 rows, u64 cols, u64 flags
// (bit 0 symmetric, bit 1 zero diagonal), then rows*cols f64 row-major.
void write_distance_binary(std::ostream& out, const DistanceMatrix& d);
DistanceMatrix read_distance_binary(std::istream& in);

}  // namespace catdist
