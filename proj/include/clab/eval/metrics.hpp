// SPDX-License-Identifier: Apache-2.0
#ifndef CLAB_EVAL_METRICS_HPP
#define CLAB_EVAL_METRICS_HPP

#include "clab/common.hpp"
#include "clab/errors.hpp"

#include <span>

namespace clab::eval {

struct Metrics {
    Scalar top1_accuracy = 0.0;
    Scalar macro_f1 = 0.0;
};

/// Accuracy plus macro-averaged F1. Per-class F1 = 2TP / (2TP + FP + FN),
/// read as 0 when the class has no true or predicted positives. Classes that
/// never appear in `labels` are excluded from the macro average even if they
/// were predicted.
Metrics compute_metrics(std::span<const int> predictions, std::span<const int> labels,
                        Index num_classes);

} // namespace clab::eval

#endif // CLAB_EVAL_METRICS_HPP
