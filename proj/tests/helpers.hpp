// SPDX-License-Identifier: Apache-2.0
#ifndef CLAB_TESTS_HELPERS_HPP
#define CLAB_TESTS_HELPERS_HPP

#include "clab/nn/tape.hpp"

#include <functional>

namespace clab::test {

/// Builds a scalar loss from the parameters on a fresh tape.
using LossBuilder = std::function<nn::Var(nn::Tape&, nn::ParamSet&)>;

inline Scalar loss_value(const LossBuilder& build, nn::ParamSet& params)
{
    nn::Tape tape;
    return tape.value(build(tape, params))(0, 0);
}

/// Central-difference check of every parameter coordinate against the tape
/// gradient. Relative error uses max(|a|, |b|, 1e-6) in the denominator so
/// near-zero coordinates compare absolutely.
inline Scalar max_grad_rel_error(const LossBuilder& build, nn::ParamSet& params,
                                 Scalar h = 1e-5)
{
    params.zero_grads();
    {
        nn::Tape tape;
        nn::Var loss = build(tape, params);
        tape.backward(loss);
    }
    Scalar worst = 0.0;
    for (std::size_t p = 0; p < params.size(); ++p) {
        nn::Tensor& t = params.at(p);
        const Vec analytic = *t.grad;
        for (Index i = 0; i < t.numel(); ++i) {
            const Scalar saved = t.data[i];
            t.data[i] = saved + h;
            const Scalar above = loss_value(build, params);
            t.data[i] = saved - h;
            const Scalar below = loss_value(build, params);
            t.data[i] = saved;
            const Scalar fd = (above - below) / (2.0 * h);
            const Scalar denom = std::max({std::abs(analytic[i]), std::abs(fd), 1e-6});
            worst = std::max(worst, std::abs(analytic[i] - fd) / denom);
        }
    }
    params.zero_grads();
    return worst;
}

inline Mat random_matrix(Index rows, Index cols, Rng& rng, Scalar scale = 1.0)
{
    Mat m(rows, cols);
    for (Index i = 0; i < m.size(); ++i) m(i / cols, i % cols) = scale * rng.normal();
    return m;
}

inline Mat random_unit_rows(Index rows, Index cols, Rng& rng)
{
    Mat m = random_matrix(rows, cols, rng);
    for (Index r = 0; r < rows; ++r) m.row(r) /= m.row(r).norm();
    return m;
}

} // namespace clab::test

#endif // CLAB_TESTS_HELPERS_HPP
