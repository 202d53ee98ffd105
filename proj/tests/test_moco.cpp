// SPDX-License-Identifier: Apache-2.0
#include "helpers.hpp"

#include "clab/contrastive/moco.hpp"
#include "clab/data/synthetic.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace clab;

namespace {

nn::EncoderConfig tiny_encoder()
{
    nn::EncoderConfig cfg;
    cfg.height = 6;
    cfg.width = 6;
    cfg.channels = 3;
    cfg.hidden_widths = {16};
    cfg.feature_dim = 8;
    cfg.projection_widths = {8, 4};
    return cfg;
}

moco::PairBatch random_batch(const nn::EncoderConfig& cfg, Index b, Rng& rng,
                             std::int64_t first_id = 0)
{
    moco::PairBatch batch;
    batch.query_views = (test::random_matrix(b, cfg.input_dim(), rng) * 0.2).array() + 0.5;
    batch.key_views = (test::random_matrix(b, cfg.input_dim(), rng) * 0.2).array() + 0.5;
    for (Index i = 0; i < b; ++i) batch.location_ids.push_back(first_id + i);
    return batch;
}

std::string file_bytes(const std::filesystem::path& p)
{
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), {}};
}

data::SyntheticSpec tiny_spec()
{
    data::SyntheticSpec spec;
    spec.num_classes = 2;
    spec.locations_per_class = 4;
    spec.views_per_location = 2;
    spec.image_size = 6;
    spec.seed = 77;
    return spec;
}

moco::PretrainConfig tiny_pretrain(Index epochs)
{
    moco::PretrainConfig cfg;
    cfg.encoder = tiny_encoder();
    cfg.contrastive.queue_capacity = 16;
    cfg.contrastive.mode = data::PairMode::mocotp;
    cfg.contrastive.mask_false_negatives = true;
    cfg.augment = data::AugmentationPolicy{};
    cfg.augment.out_height = 6;
    cfg.augment.out_width = 6;
    cfg.epochs = epochs;
    cfg.batch_size = 4;
    cfg.seed = 2024;
    return cfg;
}

} // namespace

TEST_CASE("moco step with lr=0 leaves the query encoder unchanged and grows the queue")
{
    const nn::EncoderConfig cfg = tiny_encoder();
    moco::MomentumPair pair = moco::make_momentum_pair(cfg, 1, 0.99);
    moco::KeyQueue queue(32, cfg.proj_dim());
    Rng rng(5);
    const moco::PairBatch batch = random_batch(cfg, 6, rng);
    std::vector<Vec> before;
    for (std::size_t i = 0; i < pair.query.size(); ++i)
        before.push_back(pair.query.at(i).data);
    const Scalar loss =
        moco::moco_step(pair, queue, batch, {}, cfg, {0.9, 1e-4}, 0.0);
    CHECK(std::isfinite(loss));
    CHECK(queue.size() == 6);
    for (std::size_t i = 0; i < pair.query.size(); ++i)
        CHECK((pair.query.at(i).data - before[i]).norm() == 0.0);
}

TEST_CASE("with m=1 the key encoder never moves")
{
    const nn::EncoderConfig cfg = tiny_encoder();
    moco::MomentumPair pair = moco::make_momentum_pair(cfg, 2, 1.0);
    moco::ContrastiveConfig ccfg;
    ccfg.ema = 1.0;
    pair.ema = 1.0;
    moco::KeyQueue queue(64, cfg.proj_dim());
    std::vector<Vec> key_before;
    for (std::size_t i = 0; i < pair.key.size(); ++i) key_before.push_back(pair.key.at(i).data);
    Rng rng(7);
    for (int step = 0; step < 5; ++step) {
        const moco::PairBatch batch = random_batch(cfg, 4, rng, step * 4);
        moco::moco_step(pair, queue, batch, ccfg, cfg, {0.9, 1e-4}, 0.05);
    }
    for (std::size_t i = 0; i < pair.key.size(); ++i)
        CHECK((pair.key.at(i).data - key_before[i]).norm() == 0.0);
}

TEST_CASE("key encoder gradients are never populated")
{
    const nn::EncoderConfig cfg = tiny_encoder();
    moco::MomentumPair pair = moco::make_momentum_pair(cfg, 3, 0.9);
    moco::KeyQueue queue(64, cfg.proj_dim());
    Rng rng(11);
    for (int step = 0; step < 20; ++step) {
        const moco::PairBatch batch = random_batch(cfg, 4, rng, step * 4);
        moco::moco_step(pair, queue, batch, {}, cfg, {0.9, 1e-4}, 0.03);
    }
    CHECK_FALSE(pair.key.any_grad_populated());
    CHECK_FALSE(pair.query.any_grad_populated()); // cleared after each step
}

TEST_CASE("fifty steps on one fixed batch reduce the loss")
{
    const nn::EncoderConfig cfg = tiny_encoder();
    moco::MomentumPair pair = moco::make_momentum_pair(cfg, 4, 0.99);
    moco::KeyQueue queue(64, cfg.proj_dim());
    Rng rng(13);
    const moco::PairBatch batch = random_batch(cfg, 8, rng);
    Scalar first = 0.0, last = 0.0;
    for (int step = 0; step < 50; ++step) {
        last = moco::moco_step(pair, queue, batch, {}, cfg, {0.9, 0.0}, 0.05);
        if (step == 0) first = last;
    }
    CHECK(last < first);
}

TEST_CASE("with unique location ids masking on and off agree step by step")
{
    const nn::EncoderConfig cfg = tiny_encoder();
    moco::MomentumPair masked = moco::make_momentum_pair(cfg, 5, 0.99);
    moco::MomentumPair plain = moco::make_momentum_pair(cfg, 5, 0.99);
    moco::KeyQueue queue_a(32, cfg.proj_dim());
    moco::KeyQueue queue_b(32, cfg.proj_dim());
    moco::ContrastiveConfig with_mask;
    with_mask.mask_false_negatives = true;
    moco::ContrastiveConfig no_mask;
    no_mask.mask_false_negatives = false;

    Rng rng(17);
    std::int64_t next_id = 0;
    for (int step = 0; step < 8; ++step) {
        moco::PairBatch batch = random_batch(cfg, 4, rng, next_id);
        next_id += 4; // ids unique across the whole run
        const Scalar a =
            moco::moco_step(masked, queue_a, batch, with_mask, cfg, {0.9, 1e-4}, 0.05);
        const Scalar b =
            moco::moco_step(plain, queue_b, batch, no_mask, cfg, {0.9, 1e-4}, 0.05);
        CHECK(a == b);
    }
    for (std::size_t i = 0; i < masked.query.size(); ++i)
        CHECK((masked.query.at(i).data - plain.query.at(i).data).norm() == 0.0);
}

TEST_CASE("pretraining is deterministic, resumable and honours epochs=0")
{
    const auto dir = std::filesystem::temp_directory_path() / "clab_pretrain_test";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    const data::Dataset ds = data::generate_synthetic(tiny_spec());
    const data::UnlabeledDataset view(ds);

    SUBCASE("same seed twice gives bit-identical checkpoints")
    {
        const moco::PretrainConfig cfg = tiny_pretrain(2);
        moco::pretrain(view, cfg, dir / "a.clab");
        moco::pretrain(view, cfg, dir / "b.clab");
        CHECK(file_bytes(dir / "a.clab") == file_bytes(dir / "b.clab"));
        CHECK(file_bytes(dir / "a.clab.json") == file_bytes(dir / "b.clab.json"));
    }

    SUBCASE("epochs=0 writes the initialization")
    {
        const moco::PretrainConfig cfg = tiny_pretrain(0);
        moco::pretrain(view, cfg, dir / "init.clab");
        const moco::PretrainState st = moco::load_pretrain_state(dir / "init.clab");
        CHECK(st.epochs_done == 0);
        CHECK(st.queue.size() == 0);
        const nn::ParamSet fresh = nn::init_encoder(cfg.encoder, cfg.seed);
        for (std::size_t i = 0; i < fresh.size(); ++i) {
            CHECK((st.pair.query.at(i).data - fresh.at(i).data).norm() == 0.0);
            CHECK((st.pair.key.at(i).data - fresh.at(i).data).norm() == 0.0);
        }
    }

    SUBCASE("resume reproduces the uninterrupted run bit-exactly")
    {
        moco::PretrainConfig cfg = tiny_pretrain(3);
        moco::pretrain(view, cfg, dir / "full.clab");

        moco::PretrainConfig two = cfg;
        two.epochs = 2;
        moco::pretrain(view, two, dir / "steps.clab");
        moco::pretrain(view, cfg, dir / "steps.clab", true); // continue to 3
        CHECK(file_bytes(dir / "full.clab") == file_bytes(dir / "steps.clab"));
    }

    SUBCASE("loaded state round-trips through the tensor container")
    {
        const moco::PretrainConfig cfg = tiny_pretrain(1);
        moco::pretrain(view, cfg, dir / "r.clab");
        const moco::PretrainState st = moco::load_pretrain_state(dir / "r.clab");
        CHECK(st.epochs_done == 1);
        CHECK(st.epoch_losses.size() == 1);
        CHECK(st.queue.size() == std::min<Index>(16, ds.size()));
        // re-saving from the loaded state is stable
        const auto [params, ecfg] = moco::load_encoder(dir / "r.clab");
        CHECK(params.size() == st.pair.query.size());
        CHECK(ecfg.feature_dim == cfg.encoder.feature_dim);
    }
}
