#include "doctest.h"

#include "catdist/cooccur.hpp"
#include "catdist/error.hpp"
#include "support.hpp"

#include <cmath>

using namespace catdist;

namespace {

CategoricalDataset table(std::vector<std::vector<Code>> codes, std::vector<Index> levels) {
    std::vector<VariableSchema> vars;
    for (Index j = 0; j < levels.size(); ++j) {
        VariableSchema v;
        v.name = "v" + std::to_string(j);
        for (Index l = 0; l < levels[j]; ++l) v.levels.push_back(std::to_string(l));
        vars.push_back(v);
    }
    return CategoricalDataset(std::move(vars), std::move(codes));
}

}  // namespace

TEST_CASE("perfect association gives identity profiles") {
    const auto ds = table({{0, 1, 0, 1, 1}, {0, 1, 0, 1, 1}}, {2, 2});
    const auto model = build_cooccurrence(ds);
    const auto& r = model.profile(0, 1).rows;
    CHECK(r(0, 0) == 1.0);
    CHECK(r(0, 1) == 0.0);
    CHECK(r(1, 0) == 0.0);
    CHECK(r(1, 1) == 1.0);
}

TEST_CASE("independent uniform variables give flat profiles") {
    const auto ds = table({{0, 0, 1, 1}, {0, 1, 0, 1}}, {2, 2});
    const auto model = build_cooccurrence(ds);
    for (auto [i, j] : {std::pair<Index, Index>{0, 1}, {1, 0}}) {
        const auto& r = model.profile(i, j).rows;
        CHECK((r.array() == 0.5).all());
    }
    CHECK(model.joint(0, 1).sum() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("marginals and accessor errors") {
    const auto ds = table({{0, 1, 2, 3, 0, 1, 2, 3}, {0, 0, 0, 0, 1, 1, 1, 1}}, {4, 2});
    const auto model = build_cooccurrence(ds);
    CHECK(model.marginals(0) == std::vector<double>{0.25, 0.25, 0.25, 0.25});
    CHECK_THROWS_AS(model.profile(1, 1), UsageError);
    CHECK_THROWS_AS(model.profile(0, 2), UsageError);
    CHECK_FALSE(model.has_unobserved());
}

TEST_CASE("unobserved levels are flagged or rejected") {
    const auto ds = table({{0, 0, 1}, {0, 1, 1}}, {3, 2});
    const auto model = build_cooccurrence(ds);
    CHECK(model.has_unobserved());
    const auto& prof = model.profile(0, 1);
    CHECK_FALSE(prof.row_defined(2));
    CHECK(std::isnan(prof.rows(2, 0)));
    CHECK(model.profile(1, 0).rows.row(0).sum() == doctest::Approx(1.0));
    CHECK_THROWS_WITH_AS(build_cooccurrence(ds, {true}), doctest::Contains("'2' of variable 'v0'"), DataError);
}

TEST_CASE("co-occurrence invariants on random data") {
    Rng rng(2024);
    for (int rep = 0; rep < 40; ++rep) {
        const auto ds = testing::random_dataset(rng, 20 + rng.below(150), 5, 6);
        const auto model = build_cooccurrence(ds);
        const Index q = ds.n_variables();
        for (Index j = 0; j < q; ++j) {
            double s = 0.0;
            for (double p : model.marginals(j)) s += p;
            CHECK(std::abs(s - 1.0) <= 1e-12);
        }
        for (Index i = 0; i < q; ++i) {
            for (Index j = 0; j < q; ++j) {
                if (i == j) continue;
                const auto& r = model.profile(i, j).rows;
                for (Eigen::Index a = 0; a < r.rows(); ++a) CHECK(std::abs(r.row(a).sum() - 1.0) <= 1e-12);
                const CountMatrix fij = model.joint_counts(i, j);
                const CountMatrix fji = model.joint_counts(j, i);
                CHECK(fij == fji.transpose());
                CHECK(fij.sum() == static_cast<std::int64_t>(ds.n_rows()));
                const Matrix pij = model.joint(i, j);
                const auto& pi = model.marginals(i);
                const auto& pj = model.marginals(j);
                const auto& rji = model.profile(j, i).rows;
                for (Eigen::Index a = 0; a < r.rows(); ++a) {
                    CHECK(std::abs(pij.row(a).sum() - pi[a]) <= 1e-12);
                    for (Eigen::Index l = 0; l < r.cols(); ++l) {
                        CHECK(std::abs(pi[a] * r(a, l) - pj[l] * rji(l, a)) <= 1e-12);
                        CHECK(r(a, l) == doctest::Approx(testing::oracle::profile(ds, i, static_cast<Code>(a), j)[l]));
                    }
                }
            }
        }
    }
}
