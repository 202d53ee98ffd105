// SPDX-License-Identifier: Apache-2.0
#include "helpers.hpp"

#include "clab/contrastive/moco.hpp"

#include <doctest.h>

using namespace clab;

namespace {

Mat unit_keys(Index n, Index dim, Rng& rng)
{
    return test::random_unit_rows(n, dim, rng);
}

} // namespace

TEST_CASE("enqueue preserves order and length")
{
    Rng rng(1);
    moco::KeyQueue q(8, 4);
    const Mat keys = unit_keys(4, 4, rng);
    q.enqueue(keys, std::vector<std::int64_t>{10, 11, 12, 13});
    CHECK(q.size() == 4);
    CHECK((q.embeddings() - keys).norm() == 0.0);
    CHECK(q.location_ids() == std::vector<std::int64_t>{10, 11, 12, 13});
}

TEST_CASE("overflow evicts exactly the oldest entries")
{
    Rng rng(2);
    moco::KeyQueue q(8, 3);
    const Mat first = unit_keys(8, 3, rng);
    q.enqueue(first, std::vector<std::int64_t>{0, 1, 2, 3, 4, 5, 6, 7});
    const Mat next = unit_keys(4, 3, rng);
    q.enqueue(next, std::vector<std::int64_t>{8, 9, 10, 11});
    CHECK(q.size() == 8);
    CHECK(q.location_ids() == std::vector<std::int64_t>{4, 5, 6, 7, 8, 9, 10, 11});
    CHECK((q.embeddings().topRows(4) - first.bottomRows(4)).norm() == 0.0);
    CHECK((q.embeddings().bottomRows(4) - next).norm() == 0.0);
}

TEST_CASE("random enqueue stream matches the replay oracle")
{
    Rng rng(3);
    const Index capacity = 32, dim = 5;
    moco::KeyQueue q(capacity, dim);
    std::vector<std::pair<RowVec, std::int64_t>> log; // full event history
    std::int64_t next_id = 0;
    int events = 0;
    while (events < 1000) {
        const Index batch = 1 + static_cast<Index>(rng.uniform_index(
                                static_cast<std::size_t>(capacity)));
        const Mat keys = unit_keys(batch, dim, rng);
        std::vector<std::int64_t> ids(static_cast<std::size_t>(batch));
        for (auto& id : ids) id = next_id++;
        q.enqueue(keys, ids);
        for (Index r = 0; r < batch; ++r)
            log.emplace_back(keys.row(r), ids[static_cast<std::size_t>(r)]);
        ++events;

        // queue conservation after every event
        CHECK(q.size() == std::min<Index>(capacity, static_cast<Index>(log.size())));
    }
    // surviving set is exactly the last-K suffix of the event log
    const auto ids = q.location_ids();
    const Mat emb = q.embeddings();
    const std::size_t offset = log.size() - static_cast<std::size_t>(q.size());
    for (Index i = 0; i < q.size(); ++i) {
        CHECK(ids[static_cast<std::size_t>(i)] ==
              log[offset + static_cast<std::size_t>(i)].second);
        CHECK((emb.row(i) - log[offset + static_cast<std::size_t>(i)].first).norm() == 0.0);
    }
}

TEST_CASE("enqueue contract checks")
{
    moco::KeyQueue q(4, 3);
    Rng rng(5);
    CHECK_THROWS_AS(q.enqueue(unit_keys(5, 3, rng), std::vector<std::int64_t>(5, 0)),
                    ConfigError);
    Mat non_unit = Mat::Constant(1, 3, 0.5);
    CHECK_THROWS_AS(q.enqueue(non_unit, std::vector<std::int64_t>{0}), ContractViolation);
    CHECK_THROWS_AS(q.enqueue(unit_keys(2, 3, rng), std::vector<std::int64_t>{0}),
                    ContractViolation);
}

TEST_CASE("EMA endpoint and midpoint cases are exact")
{
    nn::EncoderConfig cfg;
    cfg.height = 2;
    cfg.width = 2;
    cfg.channels = 1;
    cfg.hidden_widths = {3};
    cfg.feature_dim = 2;
    cfg.projection_widths = {2, 2};

    SUBCASE("m = 1 leaves the key encoder unchanged")
    {
        moco::MomentumPair pair = moco::make_momentum_pair(cfg, 3, 1.0);
        pair.query.at("feat.w").data.setConstant(9.0);
        const Vec before = pair.key.at("feat.w").data;
        moco::ema_update(pair);
        CHECK((pair.key.at("feat.w").data - before).norm() == 0.0);
    }
    SUBCASE("m = 0 copies the query encoder exactly")
    {
        moco::MomentumPair pair = moco::make_momentum_pair(cfg, 3, 0.0);
        pair.query.at("feat.w").data.setConstant(-4.25);
        moco::ema_update(pair);
        for (std::size_t i = 0; i < pair.key.size(); ++i)
            CHECK((pair.key.at(i).data - pair.query.at(i).data).norm() == 0.0);
    }
    SUBCASE("m = 0.5 is the exact midpoint on scalars")
    {
        moco::MomentumPair pair = moco::make_momentum_pair(cfg, 3, 0.5);
        pair.key.at("feat.b").data.setConstant(0.0);
        pair.query.at("feat.b").data.setConstant(2.0);
        moco::ema_update(pair);
        CHECK(pair.key.at("feat.b").data[0] == 1.0);
    }
}

TEST_CASE("EMA shape mismatch is a contract violation")
{
    nn::EncoderConfig a;
    a.height = 2;
    a.width = 2;
    a.channels = 1;
    a.hidden_widths = {3};
    a.feature_dim = 2;
    a.projection_widths = {2, 2};
    nn::EncoderConfig b = a;
    b.feature_dim = 3;
    b.projection_widths = {3, 2};
    nn::ParamSet key = nn::init_encoder(a, 1);
    nn::ParamSet query = nn::init_encoder(b, 1);
    CHECK_THROWS_AS(moco::ema_update(key, query, 0.5), ContractViolation);
}
