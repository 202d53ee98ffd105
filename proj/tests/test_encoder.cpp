// SPDX-License-Identifier: Apache-2.0
#include "helpers.hpp"

#include "clab/nn/encoder.hpp"

#include <doctest.h>

using namespace clab;

namespace {

nn::EncoderConfig small_cfg()
{
    nn::EncoderConfig cfg;
    cfg.height = 4;
    cfg.width = 4;
    cfg.channels = 3;
    cfg.hidden_widths = {8};
    cfg.feature_dim = 6;
    cfg.projection_widths = {6, 4};
    return cfg;
}

} // namespace

TEST_CASE("zero-weight encoder produces all-zero backbone features")
{
    const nn::EncoderConfig cfg = small_cfg();
    nn::ParamSet ps = nn::init_encoder(cfg, 1);
    for (std::size_t i = 0; i < ps.size(); ++i) ps.at(i).data.setZero();
    Rng rng(3);
    const Mat batch = test::random_matrix(5, cfg.input_dim(), rng).array().abs();
    const Mat feats = nn::encoder_features(ps, cfg, batch, nn::ForwardMode::backbone);
    CHECK(feats.norm() == 0.0);
}

TEST_CASE("projected outputs are unit norm per row")
{
    const nn::EncoderConfig cfg = small_cfg();
    nn::ParamSet ps = nn::init_encoder(cfg, 7);
    Rng rng(9);
    const Mat batch = (test::random_matrix(17, cfg.input_dim(), rng) * 0.3).array() + 0.5;
    const Mat proj = nn::encoder_features(ps, cfg, batch, nn::ForwardMode::projected);
    REQUIRE(proj.cols() == cfg.proj_dim());
    for (Index r = 0; r < proj.rows(); ++r)
        CHECK(std::abs(proj.row(r).norm() - 1.0) <= 1e-9);
}

TEST_CASE("forward is deterministic and does not mutate parameters")
{
    const nn::EncoderConfig cfg = small_cfg();
    nn::ParamSet ps = nn::init_encoder(cfg, 11);
    std::vector<Vec> before;
    for (std::size_t i = 0; i < ps.size(); ++i) before.push_back(ps.at(i).data);
    Rng rng(13);
    const Mat batch = (test::random_matrix(3, cfg.input_dim(), rng) * 0.2).array() + 0.4;
    const Mat a = nn::encoder_features(ps, cfg, batch, nn::ForwardMode::projected);
    const Mat b = nn::encoder_features(ps, cfg, batch, nn::ForwardMode::projected);
    CHECK((a - b).norm() == 0.0);
    for (std::size_t i = 0; i < ps.size(); ++i)
        CHECK((ps.at(i).data - before[i]).norm() == 0.0);
    CHECK_FALSE(ps.any_grad_populated());
}

TEST_CASE("same seed gives identical init; different seeds differ")
{
    const nn::EncoderConfig cfg = small_cfg();
    nn::ParamSet a = nn::init_encoder(cfg, 5);
    nn::ParamSet b = nn::init_encoder(cfg, 5);
    nn::ParamSet c = nn::init_encoder(cfg, 6);
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK((a.at(i).data - b.at(i).data).norm() == 0.0);
    Scalar diff = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) diff += (a.at(i).data - c.at(i).data).norm();
    CHECK(diff > 0.0);
    // biases start at zero
    CHECK(a.at("mlp0.b").data.norm() == 0.0);
    CHECK(a.at("feat.b").data.norm() == 0.0);
}

TEST_CASE("batch shape mismatch is a contract violation")
{
    const nn::EncoderConfig cfg = small_cfg();
    nn::ParamSet ps = nn::init_encoder(cfg, 1);
    const Mat bad = Mat::Zero(2, cfg.input_dim() + 1);
    CHECK_THROWS_AS(nn::encoder_features(ps, cfg, bad, nn::ForwardMode::backbone),
                    ContractViolation);
}

TEST_CASE("conv stem changes the trunk input and still validates")
{
    nn::EncoderConfig cfg = small_cfg();
    cfg.conv_stem = true;
    cfg.stem_channels = 4;
    nn::ParamSet ps = nn::init_encoder(cfg, 21);
    CHECK(ps.has("stem.k"));
    Rng rng(23);
    const Mat batch = (test::random_matrix(2, cfg.input_dim(), rng) * 0.2).array() + 0.4;
    const Mat feats = nn::encoder_features(ps, cfg, batch, nn::ForwardMode::backbone);
    CHECK(feats.cols() == cfg.feature_dim);
    CHECK(feats.allFinite());
}

TEST_CASE("encoder config validation names bad fields")
{
    nn::EncoderConfig cfg = small_cfg();
    cfg.feature_dim = 1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = small_cfg();
    cfg.projection_widths = {6, 1};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = small_cfg();
    cfg.hidden_widths = {0};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
