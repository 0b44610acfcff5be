#pragma once

#include "catdist/dataset.hpp"
#include "catdist/delta.hpp"
#include "catdist/distance.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace catdist {

// ---------------------------------------------------------------------------
// K nearest neighbours
// ---------------------------------------------------------------------------

/// Predicts from a train x test distance matrix (column t holds the distances
/// of test row t). Neighbours are the k smallest entries of the column, ties at
/// equal distance going to the lower training row. Majority vote; tied classes
/// are separated by the smaller summed neighbour distance, then the lower code.
Labeling knn_predict_from_distances(const DistanceMatrix& train_test, const Labeling& train_labels, Index k);

/// One prediction per k in `ks`, sharing a single neighbour sort per test row.
std::vector<Labeling> knn_predict_grid(const DistanceMatrix& train_test, const Labeling& train_labels,
                                       const std::vector<Index>& ks);

/// Delta must have been built on `train` (checked by fingerprint for data-dependent measures).
Labeling knn_predict(const CategoricalDataset& train, const Labeling& labels, const CategoricalDataset& test,
                     const BlockDiagonalDelta& delta, Index k, const DistanceOptions& options = {});

// ---------------------------------------------------------------------------
// Partitioning around medoids
// ---------------------------------------------------------------------------

struct PamResult {
    std::vector<Index> medoids;       // row index of the medoid of cluster c
    std::vector<Code> assignment;     // cluster per row
    double cost = 0.0;                // sum of D[row, medoid(row)]
    std::vector<double> cost_history; // cost after each assignment step
    Index iterations = 0;
    bool converged = false;
};

struct PamOptions {
    std::uint64_t seed = 0;
    Index max_iter = 100;
};

/// Alternating k-medoids: random distinct starting medoids; assign every row to
/// its nearest medoid (ties to the lowest medoid position; a medoid always
/// belongs to its own cluster); replace each medoid by the member with the
/// smallest summed distance to the other members (ties to the lowest row
/// index); stop once the medoid set no longer changes.
PamResult pam_fit(const DistanceMatrix& d, Index k, const PamOptions& options = {});

/// Nearest medoid per row of a medoids x rows distance matrix (ties to the lowest position).
std::vector<Code> assign_to_medoids(const DistanceMatrix& medoid_rows);

std::vector<Code> pam_assign(const CategoricalDataset& train, const std::vector<Index>& medoid_rows,
                             const CategoricalDataset& test, const BlockDiagonalDelta& delta,
                             const DistanceOptions& options = {});

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

double accuracy(const Labeling& predicted, const Labeling& truth);
double accuracy(std::span<const Code> predicted, std::span<const Code> truth);

/// Hubert-Arabie adjusted Rand index. When the denominator vanishes the result
/// is 1 for identical partitions and 0 otherwise.
double adjusted_rand_index(std::span<const Code> a, std::span<const Code> b);

// ---------------------------------------------------------------------------
// Repeated cross-validation
// ---------------------------------------------------------------------------

enum class Task { Knn, Pam };

struct CvOptions {
    Task task = Task::Knn;
    std::vector<Index> k_grid{1, 3, 5, 9, 15, 21};
    UnseenPolicy unseen = UnseenPolicy::Error;
    // PAM refuses non-symmetric D unless this is set.
    bool symmetrize = false;
    Index pam_max_iter = 100;
    unsigned threads = 1;
};

struct CvCell {
    std::string measure;
    Index k = 0;  // neighbours for KNN, clusters for PAM
    Index repeat = 0;
    Index fold = 0;
    std::optional<double> value;  // accuracy or ARI
    std::string error;
};

struct CvSummary {
    std::string measure;
    Index k = 0;
    double mean = 0.0;  // over repeats of the per-repeat mean over folds
    double sd = 0.0;    // sample standard deviation over repeats
    Index repeats_used = 0;
    Index failed_cells = 0;
    bool best = false;
};

struct CvReport {
    Task task = Task::Knn;
    std::vector<CvCell> cells;
    std::vector<CvSummary> summary;

    /// Chosen k for a measure: highest mean, ties to the smaller k.
    std::optional<Index> best_k(const std::string& measure) const;
    const CvSummary* find(const std::string& measure, Index k) const;
};

/// For every measure, repeat and fold: Delta from the training rows only, then
/// KNN accuracy over the k grid or PAM (k = number of classes) test ARI.
/// Cell failures are recorded in the report instead of aborting the run.
CvReport cross_validate(const CategoricalDataset& ds, const Labeling& labels, const std::vector<MeasureSpec>& measures,
                        const FoldPlan& plan, const CvOptions& options = {});

void write_cv_cells_csv(std::ostream& out, const CvReport& report);
void write_cv_summary_csv(std::ostream& out, const CvReport& report);

}  // namespace catdist
