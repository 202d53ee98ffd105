// SPDX-License-Identifier: Apache-2.0
#ifndef CLAB_NN_ENCODER_HPP
#define CLAB_NN_ENCODER_HPP

#include "clab/nn/tape.hpp"

#include <cstdint>
#include <vector>

namespace clab::nn {

/// Small configurable encoder: optional 3x3 conv stem, MLP trunk to the
/// backbone feature dimension, and an MLP projection head whose output is
/// L2-normalized row-wise.
struct EncoderConfig {
    Index height = 16;
    Index width = 16;
    Index channels = 3;
    std::vector<Index> hidden_widths = {256};
    Index feature_dim = 128;
    std::vector<Index> projection_widths = {128, 64}; // last entry is d_proj
    bool conv_stem = false;
    Index stem_channels = 8;

    Index input_dim() const { return height * width * channels; }
    Index proj_dim() const { return projection_widths.back(); }
    void validate() const;
};

enum class ForwardMode { backbone, projected };

/// Weights uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)), biases zero.
ParamSet init_encoder(const EncoderConfig& cfg, std::uint64_t seed);

/// Differentiable forward pass; gradients flow to `params` on backward().
/// batch rows are flattened images (y * width + x) * channels + c.
Var encoder_forward(Tape& tape, ParamSet& params, const EncoderConfig& cfg,
                    const Mat& batch, ForwardMode mode);

/// Read-only forward pass; `params` receives no bindings and no gradients.
Var encoder_forward(Tape& tape, const ParamSet& params, const EncoderConfig& cfg,
                    const Mat& batch, ForwardMode mode);

/// Convenience: forward on a scratch tape, returning the output by value.
Mat encoder_features(const ParamSet& params, const EncoderConfig& cfg, const Mat& batch,
                     ForwardMode mode);

} // namespace clab::nn

#endif // CLAB_NN_ENCODER_HPP
