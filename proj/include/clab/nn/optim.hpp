// SPDX-License-Identifier: Apache-2.0
#ifndef CLAB_NN_OPTIM_HPP
#define CLAB_NN_OPTIM_HPP

#include "clab/nn/param_set.hpp"

#include <span>

namespace clab::nn {

struct SgdConfig {
    Scalar momentum = 0.9;
    Scalar weight_decay = 1e-4;
};

/// One SGD-with-momentum update:
///   v <- momentum * v + (grad + weight_decay * param)
///   param <- param - lr * v
/// Increments the step counter. Gradients are left untouched; the caller
/// clears them (ParamSet::zero_grads).
void sgd_step(ParamSet& params, Scalar lr, const SgdConfig& cfg = {});

struct LrSchedule {
    enum class Kind { cosine, plateau, constant };

    Kind kind = Kind::cosine;
    Scalar base_rate = 3e-2;
    Index total_steps = 0;   // cosine horizon T
    Index patience = 5;      // plateau: epochs without improvement before decay
    Scalar factor = 0.5;     // plateau: multiplicative decay
    Scalar min_delta = 1e-4; // plateau: smallest loss drop that counts as improvement

    void validate() const;

    static LrSchedule cosine(Scalar base, Index total_steps);
    static LrSchedule plateau(Scalar base, Index patience = 5, Scalar factor = 0.5,
                              Scalar min_delta = 1e-4);
    static LrSchedule constant(Scalar base);
};

/// Rate at step/epoch t. Cosine: base * 0.5 * (1 + cos(pi * t / T)) for
/// t in [0, T]. Plateau: walks the validation-loss history and halves the
/// rate each time `patience` consecutive epochs fail to improve the best
/// loss by more than min_delta (the window restarts after each decay).
Scalar schedule_rate(const LrSchedule& s, Index t, std::span<const Scalar> history = {});

} // namespace clab::nn

#endif // CLAB_NN_OPTIM_HPP
