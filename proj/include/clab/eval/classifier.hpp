// SPDX-License-Identifier: Apache-2.0
#ifndef CLAB_EVAL_CLASSIFIER_HPP
#define CLAB_EVAL_CLASSIFIER_HPP

#include "clab/data/augment.hpp"
#include "clab/data/dataset.hpp"
#include "clab/eval/feature_bank.hpp"
#include "clab/eval/metrics.hpp"
#include "clab/nn/optim.hpp"

#include <optional>

namespace clab::eval {

/// Affine classification head (features -> logits).
struct LinearHead {
    nn::ParamSet params; // "w" (d x C) and "b" (C)

    static LinearHead init(Index feature_dim, Index num_classes, std::uint64_t seed);

    Mat logits(const Mat& features) const;
    /// Argmax per row, ties to the smallest class index.
    std::vector<int> predict(const Mat& features) const;
};

struct ClassifierConfig {
    Scalar head_lr = 1.0;
    Scalar backbone_lr = 0.0; // finetune only
    Scalar momentum = 0.9;
    Scalar weight_decay = 0.0;
    Index batch_size = 64;
    Index max_epochs = 200;
    Index plateau_patience = 5; // 2 for finetuning
    Scalar plateau_factor = 0.5;
    Scalar plateau_min_delta = 1e-4;
    Index early_stop_patience = 10;
    std::uint64_t seed = 1;

    void validate() const;
};

struct ProbeResult {
    LinearHead head;
    Metrics val_metrics;
    Index best_epoch = -1; // -1 means the untrained head (max_epochs == 0)
    std::vector<Scalar> val_losses;
};

/// Trains a single affine layer with cross-entropy on frozen features,
/// plateau-scheduled learning rate and early stopping on the validation
/// loss; returns the head from the best-validation-accuracy epoch. Neither
/// bank is mutated.
ProbeResult linear_probe(const FeatureBank& train, const FeatureBank& val,
                         const ClassifierConfig& cfg, Index num_classes);

struct FinetuneResult {
    nn::ParamSet encoder;
    LinearHead head;
    Metrics val_metrics;
    Index best_epoch = -1;
    std::vector<Scalar> val_losses;
};

/// End-to-end adaptation: backbone at cfg.backbone_lr, head at cfg.head_lr,
/// optional train-time augmentation, best-validation-accuracy snapshot
/// returned. With backbone_lr = 0 and no augmentation this reduces to
/// linear_probe on the frozen features. Starting from a freshly initialized
/// encoder gives the from-scratch baseline.
FinetuneResult finetune(const nn::ParamSet& encoder, const nn::EncoderConfig& encoder_cfg,
                        const data::Dataset& ds, std::span<const Index> train_indices,
                        std::span<const Index> val_indices, const ClassifierConfig& cfg,
                        const std::optional<data::AugmentationPolicy>& augment,
                        Index num_classes);

} // namespace clab::eval

#endif // CLAB_EVAL_CLASSIFIER_HPP
