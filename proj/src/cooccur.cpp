#include "catdist/cooccur.hpp"

#include "catdist/error.hpp"

#include <limits>

namespace catdist {

Index MarginalTable::observed_levels(Index j) const {
    Index k = 0;
    for (auto c : counts.at(j)) k += c > 0;
    return k;
}

MarginalTable build_marginals(const CategoricalDataset& ds) {
    if (ds.n_rows() == 0) throw DataError("co-occurrence: dataset has no rows");
    MarginalTable m;
    m.n = ds.n_rows();
    m.counts.resize(ds.n_variables());
    m.proportions.resize(ds.n_variables());
    for (Index j = 0; j < ds.n_variables(); ++j) {
        auto& counts = m.counts[j];
        counts.assign(ds.level_count(j), 0);
        for (Code c : ds.codes(j)) ++counts[c];
        m.proportions[j].resize(counts.size());
        for (Index l = 0; l < counts.size(); ++l)
            m.proportions[j][l] = static_cast<double>(counts[l]) / static_cast<double>(m.n);
    }
    return m;
}

Index CooccurrenceModel::pair_slot(Index i, Index j) const {
    // Position of (i, j), i < j, in the row-major upper triangle.
    const Index q = n_variables();
    return i * q - i * (i + 1) / 2 + (j - i - 1);
}

const ProfileBlock& CooccurrenceModel::profile(Index i, Index j) const {
    const Index q = n_variables();
    if (i >= q || j >= q) throw UsageError("profile: variable index out of range");
    if (i == j) throw UsageError("profile: diagonal blocks of R are not conditional distributions (i == j)");
    return profiles_[i * (q - 1) + (j < i ? j : j - 1)];
}

CountMatrix CooccurrenceModel::joint_counts(Index i, Index j) const {
    const Index q = n_variables();
    if (i >= q || j >= q) throw UsageError("joint: variable index out of range");
    if (i == j) throw UsageError("joint: i == j");
    if (i < j) return pair_counts_[pair_slot(i, j)];
    return pair_counts_[pair_slot(j, i)].transpose();
}

Matrix CooccurrenceModel::joint(Index i, Index j) const {
    return joint_counts(i, j).cast<double>() / static_cast<double>(n());
}

CooccurrenceModel build_cooccurrence(const CategoricalDataset& ds, const CooccurrenceOptions& options) {
    CooccurrenceModel model;
    model.marginals_ = build_marginals(ds);
    model.fingerprint_ = ds.fingerprint();
    const Index q = ds.n_variables();
    const auto& counts = model.marginals_.counts;

    for (Index j = 0; j < q; ++j) {
        for (Index l = 0; l < counts[j].size(); ++l) {
            if (counts[j][l] > 0) continue;
            if (options.strict)
                throw DataError("co-occurrence: level '" + ds.variable(j).levels[l] + "' of variable '" +
                                ds.variable(j).name + "' is never observed");
            model.has_unobserved_ = true;
        }
    }

    model.pair_counts_.reserve(q * (q - 1) / 2);
    for (Index i = 0; i < q; ++i) {
        for (Index j = i + 1; j < q; ++j) {
            CountMatrix f = CountMatrix::Zero(ds.level_count(i), ds.level_count(j));
            auto ci = ds.codes(i);
            auto cj = ds.codes(j);
            for (Index r = 0; r < ds.n_rows(); ++r) ++f(ci[r], cj[r]);
            model.pair_counts_.push_back(std::move(f));
        }
    }

    const double nan = std::numeric_limits<double>::quiet_NaN();
    model.profiles_.reserve(q * (q - 1));
    for (Index i = 0; i < q; ++i) {
        for (Index j = 0; j < q; ++j) {
            if (i == j) continue;
            const CountMatrix f = model.joint_counts(i, j);
            ProfileBlock block;
            block.source = i;
            block.target = j;
            block.rows.resize(f.rows(), f.cols());
            block.defined.assign(f.rows(), 0);
            for (Eigen::Index a = 0; a < f.rows(); ++a) {
                const auto row_total = counts[i][a];
                if (row_total == 0) {
                    block.rows.row(a).setConstant(nan);
                    continue;
                }
                block.defined[a] = 1;
                for (Eigen::Index l = 0; l < f.cols(); ++l)
                    block.rows(a, l) = static_cast<double>(f(a, l)) / static_cast<double>(row_total);
            }
            model.profiles_.push_back(std::move(block));
        }
    }
    return model;
}

}  // namespace catdist
