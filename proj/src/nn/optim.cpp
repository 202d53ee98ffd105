// SPDX-License-Identifier: Apache-2.0
#include "clab/nn/optim.hpp"

#include <cmath>
#include <limits>

namespace clab::nn {

void sgd_step(ParamSet& params, Scalar lr, const SgdConfig& cfg)
{
    for (std::size_t i = 0; i < params.size(); ++i)
        require<UsageError>(params.at(i).has_grad(),
                            "sgd_step requires populated gradients (missing for " +
                                params.names()[i] + ")");
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& p = params.at(i);
        Vec& v = params.momentum(i);
        v = cfg.momentum * v + (*p.grad + cfg.weight_decay * p.data);
        p.data -= lr * v;
        require<NumericError>(p.data.allFinite(),
                              "non-finite parameter after update: " + params.names()[i]);
    }
    params.increment_step();
}

void LrSchedule::validate() const
{
    require<ConfigError>(base_rate >= 0.0, "schedule base rate must be non-negative");
    if (kind == Kind::cosine)
        require<ConfigError>(total_steps > 0, "cosine schedule needs total_steps > 0");
    if (kind == Kind::plateau) {
        require<ConfigError>(patience >= 1, "plateau patience must be >= 1");
        require<ConfigError>(factor > 0.0 && factor < 1.0, "plateau factor must be in (0,1)");
        require<ConfigError>(min_delta >= 0.0, "plateau min_delta must be non-negative");
    }
}

LrSchedule LrSchedule::cosine(Scalar base, Index total_steps)
{
    LrSchedule s;
    s.kind = Kind::cosine;
    s.base_rate = base;
    s.total_steps = total_steps;
    return s;
}

LrSchedule LrSchedule::plateau(Scalar base, Index patience, Scalar factor, Scalar min_delta)
{
    LrSchedule s;
    s.kind = Kind::plateau;
    s.base_rate = base;
    s.patience = patience;
    s.factor = factor;
    s.min_delta = min_delta;
    return s;
}

LrSchedule LrSchedule::constant(Scalar base)
{
    LrSchedule s;
    s.kind = Kind::constant;
    s.base_rate = base;
    return s;
}

Scalar schedule_rate(const LrSchedule& s, Index t, std::span<const Scalar> history)
{
    s.validate();
    switch (s.kind) {
    case LrSchedule::Kind::constant:
        return s.base_rate;
    case LrSchedule::Kind::cosine: {
        require<ContractViolation>(t >= 0 && t <= s.total_steps,
                                   "cosine schedule step outside [0, T]");
        const Scalar phase = static_cast<Scalar>(t) / static_cast<Scalar>(s.total_steps);
        return s.base_rate * 0.5 * (1.0 + std::cos(M_PI * phase));
    }
    case LrSchedule::Kind::plateau: {
        Scalar rate = s.base_rate;
        Scalar best = std::numeric_limits<Scalar>::infinity();
        Index stale = 0;
        for (Scalar loss : history) {
            if (loss < best - s.min_delta) {
                best = loss;
                stale = 0;
            } else if (++stale >= s.patience) {
                rate *= s.factor;
                stale = 0; // one decay per plateau window
            }
        }
        return rate;
    }
    }
    return s.base_rate;
}

} // namespace clab::nn
