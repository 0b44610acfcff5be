#pragma once

#include "catdist/cooccur.hpp"
#include "catdist/dataset.hpp"
#include "catdist/delta.hpp"

#include <span>

namespace catdist {

/// Half the L1 distance between two distributions.
double phi_tvd(std::span<const double> ra, std::span<const double> rb);

/// Brute-force Ahmad-Dey dissimilarity: the maximum over all 2^q - 2 non-trivial
/// binary partitions (w, not w) of P(w|a) + P(not w|b) - 1. Equal to phi_tvd;
/// kept as an independent oracle. Refuses q > 20.
double ahmad_dey_oracle(std::span<const double> ra, std::span<const double> rb);

/// Symmetrised Kullback-Leibler divergence in bits,
/// sum_l r_al log2(r_al / r_bl) + r_bl log2(r_bl / r_al).
/// Entries below kl_floor are raised to kl_floor (no renormalisation).
double phi_kl(std::span<const double> ra, std::span<const double> rb, double kl_floor = 1e-10);

/// One direction only: sum_l r_al log2(r_al / r_bl). Not symmetric.
double phi_kl_directed(std::span<const double> ra, std::span<const double> rb, double kl_floor = 1e-10);

/// sum_l (r_al - r_bl)^2 / p_l with p the target variable's marginals.
double phi_chisq(std::span<const double> ra, std::span<const double> rb, std::span<const double> p_target);

/// Non-negative w_ij with zero diagonal.
class WeightMatrix {
public:
    explicit WeightMatrix(Matrix values);

    static WeightMatrix ones(Index q);
    /// 1 / (q - 1) everywhere off the diagonal.
    static WeightMatrix mean(Index q);
    /// Over q predictors plus the response (last): w_i,response = 1, else 0.
    static WeightMatrix supervised(Index q_with_response);
    /// All ones over q predictors plus the response.
    static WeightMatrix full_supervised(Index q_with_response) { return ones(q_with_response); }

    Index size() const { return static_cast<Index>(values_.rows()); }
    double operator()(Index i, Index j) const { return values_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)); }
    const Matrix& values() const { return values_; }
    WeightMatrix scaled(double c) const { return WeightMatrix(values_ * c); }

private:
    Matrix values_;
};

/// Reads a Q x Q weight matrix whose header row names the variables. An optional
/// leading column of row names is accepted. Rows/columns are matched to
/// `variable_names` by name.
WeightMatrix read_weights_csv(std::string_view text, const std::vector<std::string>& variable_names);

/// Phi per ordered pair (i, j); a single divergence for all pairs by default.
class PairDivergences {
public:
    PairDivergences(ProfileDivergence all) : default_(std::move(all)) {}  // NOLINT(google-explicit-constructor)

    void set(Index i, Index j, ProfileDivergence phi);
    const ProfileDivergence& get(Index i, Index j) const;

private:
    ProfileDivergence default_;
    std::vector<std::tuple<Index, Index, ProfileDivergence>> overrides_;
};

/// delta^i(a, b) = sum_{j != i} w_ij Phi^ij(r_a^ij, r_b^ij) for the first
/// `n_blocks` variables of the model (all when 0). Target levels with zero
/// marginal are dropped from the profiles (they are zero in every row).
BlockDiagonalDelta build_delta_association(const CooccurrenceModel& model, const std::vector<VariableSchema>& schema,
                                           const PairDivergences& phi, const WeightMatrix& weights,
                                           Index n_blocks = 0);

/// Association Delta over predictors plus the response; the response block is dropped.
/// `ds_with_response` must carry the response as its last, marked variable.
BlockDiagonalDelta build_delta_supervised(const CategoricalDataset& ds_with_response, const ProfileDivergence& phi,
                                          SupervisedMode mode);

}  // namespace catdist
