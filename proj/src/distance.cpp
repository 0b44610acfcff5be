#include "catdist/distance.hpp"

#include "catdist/error.hpp"
#include "catdist/io.hpp"
#include "catdist/parallel.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

namespace catdist {

namespace {

void check_schema(const CategoricalDataset& ds, const BlockDiagonalDelta& delta) {
    if (ds.n_variables() != delta.n_blocks())
        throw DataError("distance: dataset has " + std::to_string(ds.n_variables()) + " variables but Delta has " +
                        std::to_string(delta.n_blocks()) + " blocks");
    for (Index j = 0; j < ds.n_variables(); ++j) {
        const auto& b = delta.blocks[j];
        if (b.order() != ds.level_count(j) || b.name != ds.variable(j).name)
            throw DataError("distance: block " + std::to_string(j) + " ('" + b.name + "', order " +
                            std::to_string(b.order()) + ") does not match variable '" + ds.variable(j).name +
                            "' with " + std::to_string(ds.level_count(j)) + " levels");
    }
}

// Accumulates Delta_j[code_a(i), code_b(k)] over j into rows [begin, end) of out.
void gather_rows(const CategoricalDataset& a, const CategoricalDataset& b, const BlockDiagonalDelta& delta,
                 Matrix& out, Index begin, Index end) {
    const Index nb = b.n_rows();
    for (Index i = begin; i < end; ++i) {
        double* row = out.data() + i * nb;
        for (Index j = 0; j < delta.n_blocks(); ++j) {
            const Matrix& block = delta.blocks[j].values;
            const double* drow = block.data() + static_cast<Index>(a.code(i, j)) * static_cast<Index>(block.cols());
            const Code* cb = b.codes(j).data();
            for (Index k = 0; k < nb; ++k) row[k] += drow[cb[k]];
        }
    }
}

DistanceMatrix gather(const CategoricalDataset& a_in, const CategoricalDataset& b_in, const BlockDiagonalDelta& delta_in,
                      const DistanceOptions& options) {
    const CategoricalDataset a = a_in.predictors();
    const CategoricalDataset b = b_in.predictors();
    if (a.n_rows() == 0 || b.n_rows() == 0) throw UsageError("distance: empty dataset");
    check_schema(a, delta_in);
    check_schema(b, delta_in);
    const BlockDiagonalDelta delta = resolve_unseen(delta_in, {&a, &b}, options.unseen);

    DistanceMatrix d;
    d.values = Matrix::Zero(static_cast<Eigen::Index>(a.n_rows()), static_cast<Eigen::Index>(b.n_rows()));
    parallel_for(a.n_rows(), options.threads,
                 [&](Index begin, Index end) { gather_rows(a, b, delta, d.values, begin, end); });
    d.measure = delta.spec.fingerprint();
    d.delta_source = delta.source_fingerprint;
    d.row_source = a.fingerprint();
    d.col_source = b.fingerprint();
    if (a == b) {
        d.symmetric = delta.symmetric();
        d.zero_diagonal = delta.zero_diagonal();
    }
    return d;
}

}  // namespace

BlockDiagonalDelta resolve_unseen(const BlockDiagonalDelta& delta, const std::vector<const CategoricalDataset*>& used,
                                  UnseenPolicy policy) {
    BlockDiagonalDelta out = delta;
    for (Index j = 0; j < out.n_blocks(); ++j) {
        DeltaBlock& block = out.blocks[j];
        if (block.fully_defined()) continue;
        for (const auto* ds : used) {
            for (Code c : ds->codes(j)) {
                if (block.level_defined(c)) continue;
                if (policy == UnseenPolicy::Error)
                    throw DataError("unseen category '" + block.levels[c] + "' of variable '" + block.name +
                                    "': not present in the data Delta was built from (use the max unseen policy to fill)");
            }
        }
        double fill = 0.0;
        bool any = false;
        for (Index a = 0; a < block.order(); ++a) {
            for (Index b = 0; b < block.order(); ++b) {
                if (a == b || !block.level_defined(static_cast<Code>(a)) || !block.level_defined(static_cast<Code>(b)))
                    continue;
                fill = any ? std::max(fill, block.values(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)))
                           : block.values(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
                any = true;
            }
        }
        for (Index u = 0; u < block.order(); ++u) {
            if (block.level_defined(static_cast<Code>(u))) continue;
            const auto e = static_cast<Eigen::Index>(u);
            block.values.row(e).setConstant(fill);
            block.values.col(e).setConstant(fill);
        }
        for (Index u = 0; u < block.order(); ++u) {
            if (block.level_defined(static_cast<Code>(u))) continue;
            block.values(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(u)) = 0.0;
            block.defined[u] = 1;
        }
    }
    return out;
}

DistanceMatrix pairwise_distances(const CategoricalDataset& ds, const BlockDiagonalDelta& delta,
                                  const DistanceOptions& options) {
    return gather(ds, ds, delta, options);
}

DistanceMatrix cross_distances(const CategoricalDataset& a, const CategoricalDataset& b,
                               const BlockDiagonalDelta& delta, const DistanceOptions& options) {
    return gather(a, b, delta, options);
}

DistanceMatrix naive_pairwise_dense(const CategoricalDataset& ds_in, const BlockDiagonalDelta& delta_in) {
    const CategoricalDataset ds = ds_in.predictors();
    if (ds.n_rows() > 2000) throw UsageError("naive_pairwise_dense: n = " + std::to_string(ds.n_rows()) + " exceeds 2000");
    check_schema(ds, delta_in);
    const BlockDiagonalDelta delta = resolve_unseen(delta_in, {&ds}, UnseenPolicy::Error);

    const auto n = static_cast<Eigen::Index>(ds.n_rows());
    const auto total = static_cast<Eigen::Index>(ds.total_levels());
    Eigen::MatrixXd z = Eigen::MatrixXd::Zero(n, total);
    Eigen::Index offset = 0;
    for (Index j = 0; j < ds.n_variables(); ++j) {
        for (Eigen::Index i = 0; i < n; ++i) z(i, offset + ds.code(static_cast<Index>(i), j)) = 1.0;
        offset += static_cast<Eigen::Index>(ds.level_count(j));
    }
    const Eigen::MatrixXd big_delta = delta.dense();

    DistanceMatrix d;
    d.values = z * big_delta * z.transpose();
    d.symmetric = delta.symmetric();
    d.zero_diagonal = delta.zero_diagonal();
    d.measure = delta.spec.fingerprint();
    d.delta_source = delta.source_fingerprint;
    d.row_source = d.col_source = ds.fingerprint();
    return d;
}

DistanceMatrix symmetrize(const DistanceMatrix& d) {
    if (d.rows() != d.cols()) throw UsageError("symmetrize: matrix is not square");
    DistanceMatrix out = d;
    out.values = (d.values + d.values.transpose()) * 0.5;
    out.symmetric = true;
    return out;
}

bool MetricReport::zero_diagonal() const {
    for (const auto& b : blocks)
        if (!b.zero_diagonal) return false;
    return true;
}

bool MetricReport::symmetric() const {
    for (const auto& b : blocks)
        if (!b.symmetric) return false;
    return true;
}

bool MetricReport::triangle() const {
    for (const auto& b : blocks)
        if (b.triangle_violations) return false;
    return true;
}

MetricReport check_metric_properties(const BlockDiagonalDelta& delta, double tolerance) {
    MetricReport report;
    for (const auto& block : delta.blocks) {
        BlockMetricReport r;
        r.variable = block.variable;
        r.name = block.name;
        const auto& v = block.values;
        const auto q = v.rows();
        auto ok = [&](Eigen::Index a) { return block.level_defined(static_cast<Code>(a)); };
        for (Eigen::Index a = 0; a < q; ++a) {
            if (!ok(a)) continue;
            if (std::abs(v(a, a)) > tolerance) r.zero_diagonal = false;
            for (Eigen::Index b = 0; b < q; ++b)
                if (ok(b) && std::abs(v(a, b) - v(b, a)) > tolerance) r.symmetric = false;
        }
        for (Eigen::Index a = 0; a < q; ++a) {
            if (!ok(a)) continue;
            for (Eigen::Index c = 0; c < q; ++c) {
                if (!ok(c)) continue;
                for (Eigen::Index b = 0; b < q; ++b) {
                    if (!ok(b)) continue;
                    const double excess = v(a, c) - (v(a, b) + v(b, c));
                    if (excess > tolerance) {
                        ++r.triangle_violations;
                        r.worst_violation = std::max(r.worst_violation, excess);
                    }
                }
            }
        }
        report.blocks.push_back(std::move(r));
    }
    return report;
}

void write_distance_csv(std::ostream& out, const DistanceMatrix& d, const std::vector<std::string>& row_ids,
                        const std::vector<std::string>& col_ids) {
    auto id = [](const std::vector<std::string>& ids, Index k) { return k < ids.size() ? ids[k] : std::to_string(k); };
    std::vector<std::string> fields{""};
    for (Index c = 0; c < d.cols(); ++c) fields.push_back(id(col_ids, c));
    write_csv_row(out, fields);
    for (Index r = 0; r < d.rows(); ++r) {
        fields.assign(1, id(row_ids, r));
        for (Index c = 0; c < d.cols(); ++c) fields.push_back(format_number(d(r, c)));
        write_csv_row(out, fields);
    }
}

namespace {

constexpr char kMagic[8] = {'C', 'A', 'T', 'D', 'I', 'S', 'T', 'M'};

void put_u64(std::ostream& out, std::uint64_t v) {
    unsigned char bytes[8];
    for (int k = 0; k < 8; ++k) bytes[k] = static_cast<unsigned char>(v >> (8 * k));
    out.write(reinterpret_cast<const char*>(bytes), 8);
}

std::uint64_t get_u64(std::istream& in) {
    unsigned char bytes[8];
    if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw DataError("distance binary: truncated input");
    std::uint64_t v = 0;
    for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(bytes[k]) << (8 * k);
    return v;
}

}  // namespace

void write_distance_binary(std::ostream& out, const DistanceMatrix& d) {
    out.write(kMagic, sizeof kMagic);
    put_u64(out, d.rows());
    put_u64(out, d.cols());
    put_u64(out, (d.symmetric ? 1u : 0u) | (d.zero_diagonal ? 2u : 0u));
    for (Index r = 0; r < d.rows(); ++r)
        for (Index c = 0; c < d.cols(); ++c) put_u64(out, std::bit_cast<std::uint64_t>(d(r, c)));
}

DistanceMatrix read_distance_binary(std::istream& in) {
    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) throw DataError("distance binary: bad magic");
    const std::uint64_t rows = get_u64(in);
    const std::uint64_t cols = get_u64(in);
    const std::uint64_t flags = get_u64(in);
    DistanceMatrix d;
    d.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::uint64_t r = 0; r < rows; ++r)
        for (std::uint64_t c = 0; c < cols; ++c)
            d.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = std::bit_cast<double>(get_u64(in));
    d.symmetric = flags & 1u;
    d.zero_diagonal = flags & 2u;
    return d;
}

}  // namespace catdist
