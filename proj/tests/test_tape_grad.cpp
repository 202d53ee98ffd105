// SPDX-License-Identifier: Apache-2.0
#include "helpers.hpp"

#include "clab/nn/encoder.hpp"

#include <doctest.h>

using namespace clab;
using test::LossBuilder;
using test::max_grad_rel_error;
using test::random_matrix;
using test::random_unit_rows;

namespace {

nn::ParamSet single(const std::string& name, const Mat& value)
{
    nn::ParamSet ps;
    ps.add(name, nn::Tensor::from_matrix(value));
    return ps;
}

} // namespace

TEST_CASE("matmul gradient matches finite differences")
{
    Rng rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        const Index m = 1 + static_cast<Index>(rng.uniform_index(4));
        const Index k = 1 + static_cast<Index>(rng.uniform_index(4));
        const Index n = 1 + static_cast<Index>(rng.uniform_index(4));
        const Mat x = random_matrix(m, k, rng);
        nn::ParamSet ps = single("w", random_matrix(k, n, rng));
        LossBuilder build = [&x](nn::Tape& t, nn::ParamSet& p) {
            return nn::mean_all(nn::matmul(t.constant(x), t.param(p, "w")));
        };
        CHECK(max_grad_rel_error(build, ps) < 1e-4);
    }
}

TEST_CASE("affine + relu chain gradient matches finite differences")
{
    Rng rng(7);
    int done = 0;
    while (done < 20) {
        const Index b = 1 + static_cast<Index>(rng.uniform_index(4));
        const Index d = 2 + static_cast<Index>(rng.uniform_index(4));
        const Index h = 2 + static_cast<Index>(rng.uniform_index(4));
        const Mat x = random_matrix(b, d, rng);
        nn::ParamSet ps;
        ps.add("w", nn::Tensor::from_matrix(random_matrix(d, h, rng)));
        ps.add("b", nn::Tensor::from_matrix(random_matrix(1, h, rng, 0.1)));

        // Keep preactivations away from the relu kink so central differences
        // stay valid.
        {
            nn::Tape t;
            const Mat pre =
                t.value(nn::affine(t.constant(x), t.param(ps, "w"), t.param(ps, "b")));
            if (pre.array().abs().minCoeff() < 1e-3) continue;
        }
        LossBuilder build = [&x](nn::Tape& t, nn::ParamSet& p) {
            return nn::mean_all(
                nn::relu(nn::affine(t.constant(x), t.param(p, "w"), t.param(p, "b"))));
        };
        CHECK(max_grad_rel_error(build, ps) < 1e-4);
        ++done;
    }
}

TEST_CASE("row-wise L2 normalization gradient matches finite differences")
{
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const Index b = 1 + static_cast<Index>(rng.uniform_index(4));
        const Index d = 2 + static_cast<Index>(rng.uniform_index(6));
        const Mat coeff = random_matrix(d, d, rng);
        nn::ParamSet ps = single("x", random_matrix(b, d, rng) * 0.5);
        // A non-trivial downstream weighting makes the Jacobian asymmetric.
        LossBuilder build = [&coeff](nn::Tape& t, nn::ParamSet& p) {
            return nn::mean_all(
                nn::matmul(nn::l2_normalize_rows(t.param(p, "x")), t.constant(coeff)));
        };
        CHECK(max_grad_rel_error(build, ps) < 1e-4);
    }
}

TEST_CASE("cross-entropy gradient matches finite differences")
{
    Rng rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        const Index b = 1 + static_cast<Index>(rng.uniform_index(5));
        const Index c = 2 + static_cast<Index>(rng.uniform_index(5));
        std::vector<int> labels(static_cast<std::size_t>(b));
        for (auto& y : labels)
            y = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(c)));
        nn::ParamSet ps = single("z", random_matrix(b, c, rng));
        LossBuilder build = [labels](nn::Tape& t, nn::ParamSet& p) {
            return nn::softmax_cross_entropy(t.param(p, "z"), labels);
        };
        CHECK(max_grad_rel_error(build, ps) < 1e-4);
    }
}

TEST_CASE("conv stem gradient matches finite differences")
{
    Rng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        const Index hw = 3 + static_cast<Index>(rng.uniform_index(3));
        const Index cin = 1 + static_cast<Index>(rng.uniform_index(2));
        const Index cout = 1 + static_cast<Index>(rng.uniform_index(3));
        const Index b = 1 + static_cast<Index>(rng.uniform_index(2));
        const Mat img = random_matrix(b, hw * hw * cin, rng);
        nn::ParamSet ps;
        ps.add("k", nn::Tensor::from_matrix(random_matrix(9 * cin, cout, rng)));
        ps.add("b", nn::Tensor::from_matrix(random_matrix(1, cout, rng, 0.1)));
        LossBuilder build = [&img, hw, cin, cout](nn::Tape& t, nn::ParamSet& p) {
            return nn::mean_all(nn::conv3x3_same(t.constant(img), t.param(p, "k"),
                                                 t.param(p, "b"), hw, hw, cin, cout));
        };
        CHECK(max_grad_rel_error(build, ps) < 1e-4);
    }
}

TEST_CASE("conv input gradient flows through im2col")
{
    Rng rng(19);
    const Index hw = 4, cin = 2, cout = 3;
    const Mat kernel = random_matrix(9 * cin, cout, rng);
    const Mat bias = random_matrix(1, cout, rng, 0.1);
    nn::ParamSet ps = single("x", random_matrix(1, hw * hw * cin, rng));
    LossBuilder build = [&](nn::Tape& t, nn::ParamSet& p) {
        return nn::mean_all(nn::conv3x3_same(t.param(p, "x"), t.constant(kernel),
                                             t.constant(bias), hw, hw, cin, cout));
    };
    CHECK(max_grad_rel_error(build, ps) < 1e-4);
}

TEST_CASE("full projected encoder gradient matches finite differences")
{
    nn::EncoderConfig cfg;
    cfg.height = 4;
    cfg.width = 4;
    cfg.channels = 2;
    cfg.hidden_widths = {6};
    cfg.feature_dim = 5;
    cfg.projection_widths = {5, 3};
    Rng rng(23);
    const Mat batch = random_matrix(3, cfg.input_dim(), rng, 0.3).array() + 0.5;
    nn::ParamSet ps = nn::init_encoder(cfg, 99);
    const Mat target = random_unit_rows(3, 3, rng);
    LossBuilder build = [&](nn::Tape& t, nn::ParamSet& p) {
        nn::Var proj = nn::encoder_forward(t, p, cfg, batch, nn::ForwardMode::projected);
        // Pull the projection toward a fixed target so grads reach all layers.
        return nn::mean_all(nn::matmul(proj, t.constant(target.transpose())));
    };
    CHECK(max_grad_rel_error(build, ps) < 1e-4);
}

TEST_CASE("backward accumulates and reports usage errors")
{
    nn::ParamSet ps = single("w", Mat::Constant(2, 2, 1.5));
    const Mat x = Mat::Identity(2, 2);
    nn::Tape tape;
    nn::Var loss = nn::mean_all(nn::matmul(tape.constant(x), tape.param(ps, "w")));
    tape.backward(loss);
    const Vec once = *ps.at("w").grad;
    tape.backward(loss);
    CHECK((*ps.at("w").grad - 2.0 * once).norm() == 0.0);

    nn::Tape empty;
    CHECK_THROWS_AS(empty.backward(loss), UsageError);

    nn::Tape other;
    nn::Var not_scalar = other.leaf(Mat::Ones(2, 2));
    CHECK_THROWS_AS(other.backward(not_scalar), UsageError);
}

TEST_CASE("zero loss zeroes gradients; unreachable parameters get zero grads")
{
    nn::ParamSet ps;
    ps.add("used", nn::Tensor::from_matrix(Mat::Constant(1, 3, 2.0)));
    ps.add("unused", nn::Tensor::from_matrix(Mat::Constant(1, 3, 2.0)));
    nn::Tape tape;
    nn::Var w = tape.param(ps, "used");
    nn::Var loss = nn::mean_all(nn::matmul(w, tape.constant(Mat::Zero(3, 1))));
    tape.backward(loss);
    CHECK(ps.at("used").grad->norm() == 0.0);
    REQUIRE(ps.at("unused").has_grad());
    CHECK(ps.at("unused").grad->norm() == 0.0);
}

TEST_CASE("non-finite forward values raise numeric errors")
{
    nn::Tape tape;
    Mat bad(1, 1);
    bad(0, 0) = std::numeric_limits<Scalar>::quiet_NaN();
    CHECK_THROWS_AS(tape.constant(bad), NumericError);
}
