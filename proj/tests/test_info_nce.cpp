// SPDX-License-Identifier: Apache-2.0
#include "helpers.hpp"

#include "clab/contrastive/info_nce.hpp"

#include <doctest.h>

#include <cmath>

using namespace clab;

namespace {

Vec unit2(Scalar x)
{
    // Unit vector in the plane with first coordinate x.
    Vec v(2);
    v << x, std::sqrt(1.0 - x * x);
    return v;
}

using Negatives = std::vector<std::pair<Vec, std::int64_t>>;

} // namespace

TEST_CASE("symmetric two-way case gives ln 2")
{
    Vec q(2), k(2), n(2);
    q << 1, 0;
    k << 0, 1;
    n << 0, -1; // q.k = q.n = 0
    const Scalar loss = moco::info_nce_loss(q, k, {{n, 7}}, 1, 1.0, false);
    CHECK(loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("N negatives at the positive's similarity give ln(N+1)")
{
    for (int n_neg : {1, 4, 17, 63}) {
        Vec q(3), k(3);
        q << 1, 0, 0;
        k << 0, 1, 0;
        Negatives negs;
        for (int j = 0; j < n_neg; ++j) {
            Vec n(3);
            // all orthogonal to q, like the positive
            n << 0, std::cos(0.1 * j), std::sin(0.1 * j);
            negs.emplace_back(n, 100 + j);
        }
        const Scalar loss = moco::info_nce_loss(q, k, negs, 1, 0.37, false);
        CHECK(loss == doctest::Approx(std::log(n_neg + 1.0)).epsilon(1e-12));
    }
}

TEST_CASE("masking everything empties the denominator and zeroes the loss")
{
    Rng rng(3);
    const Mat vs = test::random_unit_rows(6, 4, rng);
    Negatives negs;
    for (Index j = 2; j < 6; ++j)
        negs.emplace_back(vs.row(j).transpose(), 42); // all share the query location
    const Scalar loss = moco::info_nce_loss(vs.row(0).transpose(), vs.row(1).transpose(),
                                            negs, 42, 0.2, true);
    CHECK(loss == 0.0);
}

TEST_CASE("temperature 0.2 example matches the direct scalar evaluation")
{
    const Vec q = unit2(1.0);
    const Vec k = unit2(0.5);
    const Negatives negs{{unit2(0.1), 10}, {unit2(-0.3), 11}};
    const Scalar loss = moco::info_nce_loss(q, k, negs, 1, 0.2, false);
    // independent oracle: plain exp/log arithmetic on the similarities
    const Scalar oracle =
        -std::log(std::exp(0.5 / 0.2) /
                  (std::exp(0.5 / 0.2) + std::exp(0.1 / 0.2) + std::exp(-0.3 / 0.2)));
    CHECK(loss == doctest::Approx(oracle).epsilon(1e-9));
    CHECK(loss == doctest::Approx(0.1429).epsilon(2e-3));
}

TEST_CASE("masked loss equals unmasked loss after physical deletion, exactly")
{
    Rng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        const Index dim = 3 + static_cast<Index>(rng.uniform_index(5));
        const Index n_neg = static_cast<Index>(rng.uniform_index(12));
        const Mat rows = test::random_unit_rows(n_neg + 2, dim, rng);
        const std::int64_t query_loc = static_cast<std::int64_t>(rng.uniform_index(3));
        Negatives all, kept;
        for (Index j = 0; j < n_neg; ++j) {
            const std::int64_t loc = static_cast<std::int64_t>(rng.uniform_index(3));
            all.emplace_back(rows.row(j + 2).transpose(), loc);
            if (loc != query_loc) kept.emplace_back(rows.row(j + 2).transpose(), loc);
        }
        const Vec q = rows.row(0).transpose();
        const Vec k = rows.row(1).transpose();
        const Scalar masked = moco::info_nce_loss(q, k, all, query_loc, 0.2, true);
        const Scalar deleted = moco::info_nce_loss(q, k, kept, query_loc, 0.2, false);
        CHECK(masked == deleted); // exact
    }
}

TEST_CASE("loss is non-negative, zero only with an empty kept set")
{
    Rng rng(29);
    for (int trial = 0; trial < 100; ++trial) {
        const Index dim = 2 + static_cast<Index>(rng.uniform_index(6));
        const Index n_neg = static_cast<Index>(rng.uniform_index(8));
        const Mat rows = test::random_unit_rows(n_neg + 2, dim, rng);
        Negatives negs;
        for (Index j = 0; j < n_neg; ++j)
            negs.emplace_back(rows.row(j + 2).transpose(), 5);
        const bool mask = rng.uniform() < 0.5;
        const Scalar loss = moco::info_nce_loss(rows.row(0).transpose(),
                                                rows.row(1).transpose(), negs, 5,
                                                rng.uniform(0.05, 2.0), mask);
        const bool kept_empty = mask || n_neg == 0;
        if (kept_empty && mask)
            CHECK(loss == 0.0);
        else if (n_neg == 0)
            CHECK(loss == 0.0);
        else
            CHECK(loss > 0.0);
    }
}

TEST_CASE("info_nce gradient w.r.t. q and k+ matches finite differences")
{
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const Index dim = 3 + static_cast<Index>(rng.uniform_index(4));
        const Index batch = 1 + static_cast<Index>(rng.uniform_index(3));
        const Index n_neg = 1 + static_cast<Index>(rng.uniform_index(6));
        const Mat negs = test::random_unit_rows(n_neg, dim, rng);
        std::vector<std::int64_t> neg_ids(static_cast<std::size_t>(n_neg));
        for (auto& id : neg_ids) id = static_cast<std::int64_t>(rng.uniform_index(3));
        std::vector<std::int64_t> query_ids(static_cast<std::size_t>(batch));
        for (auto& id : query_ids) id = static_cast<std::int64_t>(rng.uniform_index(3));
        const bool mask = trial % 2 == 0;

        nn::ParamSet ps;
        ps.add("q", nn::Tensor::from_matrix(test::random_matrix(batch, dim, rng)));
        ps.add("k", nn::Tensor::from_matrix(test::random_matrix(batch, dim, rng)));
        // Raw parameters pass through on-tape normalization, as in training.
        test::LossBuilder build = [&](nn::Tape& t, nn::ParamSet& p) {
            nn::Var q = nn::l2_normalize_rows(t.param(p, "q"));
            nn::Var k = nn::l2_normalize_rows(t.param(p, "k"));
            return nn::mean_all(
                moco::info_nce(q, k, negs, neg_ids, query_ids, 0.2, mask));
        };
        CHECK(test::max_grad_rel_error(build, ps) < 1e-4);
    }
}

TEST_CASE("contract checks: non-unit inputs and bad temperature")
{
    Vec q(2), k(2);
    q << 1, 0;
    k << 0, 1;
    Vec bad(2);
    bad << 0.9, 0.1; // norm != 1
    CHECK_THROWS_AS(moco::info_nce_loss(q, k, {{bad, 1}}, 0, 0.2, false),
                    ContractViolation);
    CHECK_THROWS_AS(moco::info_nce_loss(bad, k, {}, 0, 0.2, false), ContractViolation);
    CHECK_THROWS_AS(moco::info_nce_loss(q, k, {}, 0, 0.0, false), ConfigError);
    CHECK_THROWS_AS(moco::info_nce_loss(q, k, {}, 0, -1.0, false), ConfigError);
}
