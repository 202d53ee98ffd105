// SPDX-License-Identifier: Apache-2.0
#include "clab/eval/metrics.hpp"

#include <vector>

namespace clab::eval {

Metrics compute_metrics(std::span<const int> predictions, std::span<const int> labels,
                        Index num_classes)
{
    require<ContractViolation>(!labels.empty(), "metrics need at least one sample");
    require<ContractViolation>(predictions.size() == labels.size(),
                               "prediction and label counts differ");
    for (int y : labels)
        require<ContractViolation>(y >= 0 && y < num_classes, "label out of range");
    for (int p : predictions)
        require<ContractViolation>(p >= 0 && p < num_classes, "prediction out of range");

    std::vector<Index> tp(static_cast<std::size_t>(num_classes), 0);
    std::vector<Index> fp(static_cast<std::size_t>(num_classes), 0);
    std::vector<Index> fn(static_cast<std::size_t>(num_classes), 0);
    Index correct = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto y = static_cast<std::size_t>(labels[i]);
        const auto p = static_cast<std::size_t>(predictions[i]);
        if (y == p) {
            ++tp[y];
            ++correct;
        } else {
            ++fp[p];
            ++fn[y];
        }
    }

    Metrics m;
    m.top1_accuracy = static_cast<Scalar>(correct) / static_cast<Scalar>(labels.size());

    Scalar f1_sum = 0.0;
    Index present = 0;
    for (std::size_t c = 0; c < static_cast<std::size_t>(num_classes); ++c) {
        if (tp[c] + fn[c] == 0) continue; // class absent from labels
        ++present;
        const Scalar denom = static_cast<Scalar>(2 * tp[c] + fp[c] + fn[c]);
        if (denom > 0.0) f1_sum += 2.0 * static_cast<Scalar>(tp[c]) / denom;
    }
    m.macro_f1 = f1_sum / static_cast<Scalar>(present);
    return m;
}

} // namespace clab::eval
