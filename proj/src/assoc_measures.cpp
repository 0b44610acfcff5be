#include "catdist/assoc_measures.hpp"

#include "catdist/error.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>

namespace catdist {

namespace {

constexpr double kSumTolerance = 1e-9;

void require_profiles(std::span<const double> ra, std::span<const double> rb, const char* what) {
    if (ra.size() != rb.size())
        throw UsageError(std::string(what) + ": profile lengths differ (" + std::to_string(ra.size()) + " vs " +
                         std::to_string(rb.size()) + ")");
    if (ra.empty()) throw UsageError(std::string(what) + ": empty profiles");
    const double sa = std::accumulate(ra.begin(), ra.end(), 0.0);
    const double sb = std::accumulate(rb.begin(), rb.end(), 0.0);
    if (std::abs(sa - 1.0) > kSumTolerance || std::abs(sb - 1.0) > kSumTolerance)
        throw UsageError(std::string(what) + ": profiles must sum to 1");
}

double floored(double x, double floor) { return x < floor ? floor : x; }

}  // namespace

double phi_tvd(std::span<const double> ra, std::span<const double> rb) {
    require_profiles(ra, rb, "tvd");
    double s = 0.0;
    for (std::size_t l = 0; l < ra.size(); ++l) s += std::abs(ra[l] - rb[l]);
    return 0.5 * s;
}

double ahmad_dey_oracle(std::span<const double> ra, std::span<const double> rb) {
    require_profiles(ra, rb, "ahmad_dey_oracle");
    const std::size_t q = ra.size();
    if (q > 20) throw UsageError("ahmad_dey_oracle: q = " + std::to_string(q) + " exceeds the enumeration bound of 20");
    if (q < 2) return 0.0;
    const std::uint32_t full = (1u << q) - 1u;
    double best = -std::numeric_limits<double>::infinity();
    // Every non-empty proper subset w of the target categories.
    for (std::uint32_t mask = 1; mask < full; ++mask) {
        double in_a = 0.0;   // P(w | a)
        double out_b = 0.0;  // P(not w | b)
        for (std::size_t l = 0; l < q; ++l) {
            if (mask & (1u << l))
                in_a += ra[l];
            else
                out_b += rb[l];
        }
        best = std::max(best, in_a + out_b - 1.0);
    }
    return best;
}

double phi_kl(std::span<const double> ra, std::span<const double> rb, double kl_floor) {
    require_profiles(ra, rb, "kl");
    if (kl_floor < 0.0) throw UsageError("kl: negative floor");
    double s = 0.0;
    for (std::size_t l = 0; l < ra.size(); ++l) {
        const double a = floored(ra[l], kl_floor);
        const double b = floored(rb[l], kl_floor);
        if (a == 0.0 && b == 0.0) continue;
        if (a == 0.0 || b == 0.0) throw DomainError("kl: zero profile entry with kl_floor = 0 (infinite divergence)");
        s += a * std::log2(a / b) + b * std::log2(b / a);
    }
    return s;
}

double phi_kl_directed(std::span<const double> ra, std::span<const double> rb, double kl_floor) {
    require_profiles(ra, rb, "kl_directed");
    if (kl_floor < 0.0) throw UsageError("kl: negative floor");
    double s = 0.0;
    for (std::size_t l = 0; l < ra.size(); ++l) {
        const double a = floored(ra[l], kl_floor);
        const double b = floored(rb[l], kl_floor);
        if (a == 0.0) continue;
        if (b == 0.0) throw DomainError("kl: zero profile entry with kl_floor = 0 (infinite divergence)");
        s += a * std::log2(a / b);
    }
    // Flooring without renormalising can push the directed sum a hair below 0.
    return std::max(0.0, s);
}

double phi_chisq(std::span<const double> ra, std::span<const double> rb, std::span<const double> p_target) {
    require_profiles(ra, rb, "chisq");
    if (p_target.size() != ra.size()) throw UsageError("chisq: marginal length differs from profile length");
    double s = 0.0;
    for (std::size_t l = 0; l < ra.size(); ++l) {
        if (!(p_target[l] > 0.0)) throw DomainError("chisq: zero marginal proportion at target level " + std::to_string(l));
        const double d = ra[l] - rb[l];
        s += d * d / p_target[l];
    }
    return s;
}

WeightMatrix::WeightMatrix(Matrix values) : values_(std::move(values)) {
    if (values_.rows() != values_.cols()) throw UsageError("weights: matrix must be square");
    for (Eigen::Index i = 0; i < values_.rows(); ++i) {
        for (Eigen::Index j = 0; j < values_.cols(); ++j) {
            const double w = values_(i, j);
            if (!std::isfinite(w) || w < 0.0) throw UsageError("weights: entries must be finite and non-negative");
            if (i == j && w != 0.0) throw UsageError("weights: diagonal must be zero");
        }
    }
}

WeightMatrix WeightMatrix::ones(Index q) {
    Matrix m = Matrix::Ones(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(q));
    m.diagonal().setZero();
    return WeightMatrix(std::move(m));
}

WeightMatrix WeightMatrix::mean(Index q) {
    if (q < 2) throw UsageError("weights: mean preset needs at least two variables");
    Matrix m = ones(q).values() / static_cast<double>(q - 1);
    return WeightMatrix(std::move(m));
}

WeightMatrix WeightMatrix::supervised(Index q_with_response) {
    const auto q = static_cast<Eigen::Index>(q_with_response);
    Matrix m = Matrix::Zero(q, q);
    for (Eigen::Index i = 0; i + 1 < q; ++i) m(i, q - 1) = 1.0;
    return WeightMatrix(std::move(m));
}

WeightMatrix read_weights_csv(std::string_view text, const std::vector<std::string>& variable_names) {
    CsvOptions opts;
    opts.has_header = true;
    const RawTable t = read_csv(text, opts);
    const Index q = variable_names.size();
    const bool row_names = t.header.size() == q + 1;
    if (t.header.size() != q && !row_names)
        throw DataError("weights: expected " + std::to_string(q) + " columns, found " + std::to_string(t.header.size()));
    if (t.rows.size() != q)
        throw DataError("weights: expected " + std::to_string(q) + " rows, found " + std::to_string(t.rows.size()));
    const Index skip = row_names ? 1 : 0;
    auto position = [&](const std::string& name) {
        for (Index k = 0; k < q; ++k)
            if (variable_names[k] == name) return k;
        throw DataError("weights: unknown variable '" + name + "'");
    };
    std::vector<Index> col_var(q), row_var(q);
    for (Index c = 0; c < q; ++c) col_var[c] = position(t.header[c + skip]);
    for (Index r = 0; r < q; ++r) row_var[r] = row_names ? position(t.rows[r][0].value_or("")) : col_var[r];
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(q));
    for (Index r = 0; r < q; ++r) {
        for (Index c = 0; c < q; ++c) {
            const auto& cell = t.rows[r][c + skip];
            if (!cell) throw DataError("weights: missing value in row " + std::to_string(r + 1));
            double v = 0.0;
            try {
                std::size_t used = 0;
                v = std::stod(*cell, &used);
                if (used != cell->size()) throw std::invalid_argument("trailing");
            } catch (const std::exception&) {
                throw DataError("weights: '" + *cell + "' is not a number");
            }
            m(static_cast<Eigen::Index>(row_var[r]), static_cast<Eigen::Index>(col_var[c])) = v;
        }
    }
    return WeightMatrix(std::move(m));
}

void PairDivergences::set(Index i, Index j, ProfileDivergence phi) {
    for (auto& [a, b, p] : overrides_) {
        if (a == i && b == j) {
            p = std::move(phi);
            return;
        }
    }
    overrides_.emplace_back(i, j, std::move(phi));
}

const ProfileDivergence& PairDivergences::get(Index i, Index j) const {
    for (const auto& [a, b, p] : overrides_)
        if (a == i && b == j) return p;
    return default_;
}

BlockDiagonalDelta build_delta_association(const CooccurrenceModel& model, const std::vector<VariableSchema>& schema,
                                           const PairDivergences& phi, const WeightMatrix& weights, Index n_blocks) {
    const Index q = model.n_variables();
    if (q < 2) throw UsageError("association measures need at least two variables");
    if (weights.size() != q)
        throw UsageError("weights: " + std::to_string(weights.size()) + "x" + std::to_string(weights.size()) +
                         " matrix for " + std::to_string(q) + " variables");
    if (schema.size() != q) throw UsageError("association: schema does not match the model");
    if (n_blocks == 0) n_blocks = q;
    const double nan = std::numeric_limits<double>::quiet_NaN();

    BlockDiagonalDelta delta;
    delta.source_fingerprint = model.source_fingerprint();
    delta.blocks.reserve(n_blocks);
    for (Index i = 0; i < n_blocks; ++i) {
        const auto qi = static_cast<Eigen::Index>(schema[i].level_count());
        DeltaBlock block = make_block(i, schema[i].name, schema[i].levels, Matrix::Zero(qi, qi));
        for (Eigen::Index a = 0; a < qi; ++a) block.defined[a] = model.marginals().observed(i, static_cast<Code>(a));

        for (Index j = 0; j < q; ++j) {
            if (j == i || weights(i, j) == 0.0) continue;
            const double w = weights(i, j);
            const ProfileDivergence& f = phi.get(i, j);
            const ProfileBlock& prof = model.profile(i, j);

            // Target levels that never occur have zero mass in every profile row.
            std::vector<Eigen::Index> keep;
            const auto& pj = model.marginals(j);
            for (Index l = 0; l < pj.size(); ++l)
                if (pj[l] > 0.0) keep.push_back(static_cast<Eigen::Index>(l));
            std::vector<double> p_kept;
            for (auto l : keep) p_kept.push_back(pj[static_cast<Index>(l)]);
            std::vector<std::vector<double>> rows(static_cast<std::size_t>(qi));
            for (Eigen::Index a = 0; a < qi; ++a) {
                if (!block.defined[a]) continue;
                for (auto l : keep) rows[a].push_back(prof.rows(a, l));
            }

            const bool sym = f.symmetric();
            const bool custom = f.kind == Divergence::Custom;
            if (!sym) block.symmetric = false;
            for (Eigen::Index a = 0; a < qi; ++a) {
                if (!block.defined[a]) continue;
                for (Eigen::Index b = custom ? a : a + 1; b < qi; ++b) {
                    if (!block.defined[b]) continue;
                    const double ab = f(rows[a], rows[b], p_kept);
                    const double ba = sym ? ab : f(rows[b], rows[a], p_kept);
                    if (!std::isfinite(ab) || !std::isfinite(ba) || ab < 0.0 || ba < 0.0)
                        throw DomainError("divergence '" + f.name() + "' returned a negative or non-finite value for variable '" +
                                          schema[i].name + "' against '" + schema[j].name + "'");
                    block.values(a, b) += w * ab;
                    if (b != a) block.values(b, a) += w * ba;
                }
            }
        }
        for (Eigen::Index a = 0; a < qi; ++a) {
            if (block.values(a, a) != 0.0) block.zero_diagonal = false;
            if (block.defined[a]) continue;
            block.values.row(a).setConstant(nan);
            block.values.col(a).setConstant(nan);
        }
        delta.blocks.push_back(std::move(block));
    }
    return delta;
}

BlockDiagonalDelta build_delta_supervised(const CategoricalDataset& ds_with_response, const ProfileDivergence& phi,
                                          SupervisedMode mode) {
    const auto response = ds_with_response.response_index();
    if (!response || *response + 1 != ds_with_response.n_variables())
        throw UsageError("supervised measures need a dataset with the response appended as its last variable");
    if (mode == SupervisedMode::None) throw UsageError("build_delta_supervised: mode must be supervised or full");
    const Index q = ds_with_response.n_variables() - 1;
    if (q < 1) throw UsageError("supervised measures need at least one predictor");
    Index classes = 0;
    for (Code c = 0; c < ds_with_response.level_count(*response); ++c) classes += ds_with_response.observed(*response, c);
    if (classes < 2) throw DataError("supervised measures need at least two observed response classes");

    const CooccurrenceModel model = build_cooccurrence(ds_with_response);
    const WeightMatrix w =
        mode == SupervisedMode::Supervised ? WeightMatrix::supervised(q + 1) : WeightMatrix::full_supervised(q + 1);
    BlockDiagonalDelta delta = build_delta_association(model, ds_with_response.variables(), phi, w, q);
    delta.spec.measure = Measure::Association;
    delta.spec.phi = phi;
    delta.spec.supervised = mode;
    return delta;
}

}  // namespace catdist
