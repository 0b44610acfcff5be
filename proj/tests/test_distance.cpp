#include "doctest.h"

#include "catdist/distance.hpp"
#include "catdist/error.hpp"
#include "catdist/measures.hpp"
#include "support.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

using namespace catdist;

namespace {

double max_abs_diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("gather matches the dense product for every measure") {
    Rng rng(17);
    for (const auto& id : builtin_measure_names()) {
        CAPTURE(id);
        for (int rep = 0; rep < 4; ++rep) {
            // Three or more levels keep lin away from its two-level domain error.
            std::vector<Index> levels(2 + rng.below(5));
            for (auto& l : levels) l = 3 + rng.below(4);
            const auto ds = testing::random_dataset(rng, 20 + rng.below(100), levels);
            auto spec = MeasureSpec::parse(id);
            std::vector<std::string> raw;
            for (Index i = 0; i < ds.n_rows(); ++i) raw.push_back(i % 3 == 0 ? "A" : (i % 3 == 1 ? "B" : "C"));
            const auto labels = encode_labels(raw);
            const auto delta = build_delta(spec, ds, &labels);
            const auto gather = pairwise_distances(ds, delta);
            const auto dense = naive_pairwise_dense(ds, delta);
            CHECK(max_abs_diff(gather.values, dense.values) <= 1e-12);
        }
    }
}

TEST_CASE("matching distance is the mismatch count") {
    Rng rng(18);
    const auto ds = testing::random_dataset(rng, 150, {2, 5, 3, 4, 6});
    const auto d = pairwise_distances(ds, build_delta(MeasureSpec::parse("matching"), ds));
    for (Index i = 0; i < ds.n_rows(); ++i) {
        for (Index k = 0; k < ds.n_rows(); ++k) {
            int mism = 0;
            for (Index j = 0; j < ds.n_variables(); ++j) mism += ds.code(i, j) != ds.code(k, j);
            CHECK(d(i, k) == static_cast<double>(mism));
        }
    }
    CHECK(d.symmetric);
    CHECK(d.zero_diagonal);
}

TEST_CASE("distance is additive over variables") {
    Rng rng(19);
    const auto ds = testing::random_dataset(rng, 40, {3, 4, 5});
    const auto delta = build_delta(MeasureSpec::parse("of"), ds);
    Matrix sum = Matrix::Zero(40, 40);
    for (Index j = 0; j < 3; ++j) {
        BlockDiagonalDelta one = delta;
        for (Index m = 0; m < 3; ++m)
            if (m != j) one.blocks[m].values.setZero();
        sum += pairwise_distances(ds, one).values;
    }
    CHECK(max_abs_diff(sum, pairwise_distances(ds, delta).values) <= 1e-12);
}

TEST_CASE("row permutation permutes the distance matrix") {
    Rng rng(20);
    const auto ds = testing::random_dataset(rng, 30, {3, 3, 4});
    const auto delta = build_delta(MeasureSpec::parse("matching"), ds);
    std::vector<Index> perm(30);
    std::iota(perm.begin(), perm.end(), Index{0});
    rng.shuffle(std::span<Index>(perm));
    const auto d = pairwise_distances(ds, delta);
    const auto dp = pairwise_distances(subset(ds, perm), delta);
    for (Index i = 0; i < 30; ++i)
        for (Index k = 0; k < 30; ++k) CHECK(dp(i, k) == d(perm[i], perm[k]));
}

TEST_CASE("cross distances of a dataset with itself equal the pairwise matrix") {
    Rng rng(21);
    const auto ds = testing::random_dataset(rng, 50, {3, 5});
    const auto delta = build_delta(MeasureSpec::parse("kl"), ds);
    CHECK(cross_distances(ds, ds, delta).values == pairwise_distances(ds, delta).values);
    DistanceOptions threaded;
    threaded.threads = 4;
    CHECK(pairwise_distances(ds, delta, threaded).values == pairwise_distances(ds, delta).values);
}

TEST_CASE("non symmetric delta flows through and can be symmetrised") {
    Rng rng(22);
    const auto ds = testing::random_dataset(rng, 40, {3, 4});
    auto spec = MeasureSpec::parse("kl_directed");
    const auto delta = build_delta(spec, ds);
    CHECK_FALSE(delta.symmetric());
    const auto d = pairwise_distances(ds, delta);
    CHECK_FALSE(d.symmetric);
    const auto s = symmetrize(d);
    CHECK(s.symmetric);
    CHECK(s.values == s.values.transpose());
}

TEST_CASE("unseen levels follow the policy") {
    VariableSchema v{"x", {"a", "b", "c"}, std::nullopt};
    VariableSchema w{"y", {"p", "q"}, std::nullopt};
    const CategoricalDataset train({v, w}, {{0, 0, 1, 1, 0}, {0, 1, 1, 0, 0}});
    const CategoricalDataset test({v, w}, {{2, 1}, {0, 1}});
    const auto delta = build_delta(MeasureSpec::parse("of"), train);
    CHECK_THROWS_WITH_AS(cross_distances(train, test, delta), doctest::Contains("'c'"), DataError);
    DistanceOptions max;
    max.unseen = UnseenPolicy::Max;
    const auto d = cross_distances(train, test, delta, max);
    const double block_max = delta.blocks[0].values(0, 1);
    const double y_part = delta.blocks[1].values(train.code(0, 1), 0);
    CHECK(d(0, 0) == doctest::Approx(block_max + y_part));
    // Seen test rows are unaffected by the fill.
    CHECK(d(2, 1) == doctest::Approx(delta.blocks[0].values(1, 1) + delta.blocks[1].values(1, 1)));
}

TEST_CASE("schema mismatch is a data error") {
    Rng rng(23);
    const auto a = testing::random_dataset(rng, 10, {3, 3});
    const auto b = testing::random_dataset(rng, 10, {3, 4});
    CHECK_THROWS_AS(cross_distances(a, b, build_delta(MeasureSpec::parse("matching"), a)), DataError);
}

TEST_CASE("dense oracle refuses large inputs") {
    Rng rng(24);
    const auto ds = testing::random_dataset(rng, 2001, {2});
    CHECK_THROWS_AS(naive_pairwise_dense(ds, build_delta(MeasureSpec::parse("matching"), ds)), UsageError);
}

TEST_CASE("binary and csv output") {
    Rng rng(25);
    const auto ds = testing::random_dataset(rng, 7, {3, 4});
    const auto d = pairwise_distances(ds, build_delta(MeasureSpec::parse("lin"), ds));
    std::stringstream bin;
    write_distance_binary(bin, d);
    const auto back = read_distance_binary(bin);
    CHECK(back.values == d.values);
    CHECK(back.symmetric == d.symmetric);
    CHECK(back.zero_diagonal == d.zero_diagonal);

    std::stringstream garbage("NOTADIST");
    CHECK_THROWS_AS(read_distance_binary(garbage), DataError);

    DistanceMatrix small;
    small.values = Matrix(2, 2);
    small.values << 0, 0.1, 1.0 / 3.0, -0.0;
    std::ostringstream csv;
    write_distance_csv(csv, small, {"r1", "r2"}, {"c1", "c2"});
    CHECK(csv.str() == ",c1,c2\nr1,0,0.1\nr2,0.333333333333,0\n");
}
