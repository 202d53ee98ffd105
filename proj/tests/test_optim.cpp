// SPDX-License-Identifier: Apache-2.0
#include "clab/nn/optim.hpp"

#include <doctest.h>

using namespace clab;

namespace {

nn::ParamSet scalar_param(Scalar value)
{
    nn::ParamSet ps;
    nn::Tensor t({1});
    t.data[0] = value;
    ps.add("x", std::move(t));
    return ps;
}

void set_grad(nn::ParamSet& ps, const std::string& name, Scalar g)
{
    ps.at(name).ensure_grad();
    (*ps.at(name).grad)[0] = g;
}

} // namespace

TEST_CASE("sgd step definition")
{
    nn::ParamSet ps = scalar_param(1.0);
    set_grad(ps, "x", 1.0);
    nn::sgd_step(ps, 0.1, {0.9, 0.0});
    CHECK(ps.at("x").data[0] == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(ps.momentum("x")[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(ps.step() == 1);
    CHECK(ps.at("x").has_grad()); // grads untouched; caller clears
}

TEST_CASE("sgd with lr=0 leaves parameters unchanged")
{
    nn::ParamSet ps = scalar_param(2.5);
    set_grad(ps, "x", 3.0);
    nn::sgd_step(ps, 0.0, {0.9, 1e-4});
    CHECK(ps.at("x").data[0] == 2.5);
    CHECK(ps.step() == 1);
}

TEST_CASE("sgd requires populated gradients")
{
    nn::ParamSet ps = scalar_param(1.0);
    CHECK_THROWS_AS(nn::sgd_step(ps, 0.1), UsageError);
}

TEST_CASE("three momentum steps on the quadratic match the hand recurrence")
{
    // f(x) = x^2 / 2, grad = x
    nn::ParamSet ps = scalar_param(1.0);
    Scalar x = 1.0, v = 0.0;
    for (int step = 0; step < 3; ++step) {
        set_grad(ps, "x", ps.at("x").data[0]);
        nn::sgd_step(ps, 0.1, {0.9, 0.0});
        ps.zero_grads();
        v = 0.9 * v + x;
        x -= 0.1 * v;
        CHECK(ps.at("x").data[0] == doctest::Approx(x).epsilon(1e-15));
    }
    CHECK(ps.at("x").data[0] == doctest::Approx(0.486).epsilon(1e-12));
}

TEST_CASE("update is invariant under grad*c, lr/c with no decay or momentum")
{
    // c = 4 is a power of two, so the scaling is exact in floating point.
    nn::ParamSet a = scalar_param(0.75);
    nn::ParamSet b = scalar_param(0.75);
    set_grad(a, "x", 0.3);
    set_grad(b, "x", 0.3 * 4.0);
    nn::sgd_step(a, 0.2, {0.0, 0.0});
    nn::sgd_step(b, 0.2 / 4.0, {0.0, 0.0});
    CHECK(a.at("x").data[0] == b.at("x").data[0]);
}

TEST_CASE("cosine schedule endpoints and midpoint")
{
    const auto s = nn::LrSchedule::cosine(3e-2, 100);
    CHECK(nn::schedule_rate(s, 0) == doctest::Approx(3e-2).epsilon(1e-15));
    CHECK(nn::schedule_rate(s, 50) == doctest::Approx(1.5e-2).epsilon(1e-12));
    CHECK(nn::schedule_rate(s, 100) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK_THROWS_AS(nn::schedule_rate(s, 101), ContractViolation);

    // monotone non-increasing over the horizon
    Scalar prev = nn::schedule_rate(s, 0);
    for (Index t = 1; t <= 100; ++t) {
        const Scalar r = nn::schedule_rate(s, t);
        CHECK(r <= prev + 1e-15);
        prev = r;
    }
}

TEST_CASE("plateau schedule halves after patience epochs without improvement")
{
    const auto s = nn::LrSchedule::plateau(1.0, 5, 0.5, 1e-4);
    const std::vector<Scalar> flat{1, 1, 1, 1, 1, 1};
    CHECK(nn::schedule_rate(s, 0, std::span<const Scalar>(flat.data(), 5)) == 1.0);
    CHECK(nn::schedule_rate(s, 0, flat) == 0.5);
    // one decay per plateau window: five more flat epochs halve again
    const std::vector<Scalar> longer{1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1};
    CHECK(nn::schedule_rate(s, 0, longer) == 0.25);
    // an improvement resets the window
    const std::vector<Scalar> improving{1, 0.9, 0.8, 0.7, 0.6, 0.5};
    CHECK(nn::schedule_rate(s, 0, improving) == 1.0);
}

TEST_CASE("constant schedule ignores history")
{
    const auto s = nn::LrSchedule::constant(0.3);
    const std::vector<Scalar> losses{5, 4, 3};
    CHECK(nn::schedule_rate(s, 7, losses) == 0.3);
}
