// SPDX-License-Identifier: Apache-2.0
#include "clab/nn/encoder.hpp"

#include <cmath>
#include <string>

namespace clab::nn {

void EncoderConfig::validate() const
{
    require<ConfigError>(height > 0 && width > 0 && channels > 0,
                         "encoder input dimensions must be positive");
    require<ConfigError>(feature_dim >= 2, "feature_dim must be >= 2");
    require<ConfigError>(!projection_widths.empty() && projection_widths.back() >= 2,
                         "projection head must end in a width >= 2");
    for (Index w : hidden_widths)
        require<ConfigError>(w > 0, "hidden widths must be positive");
    for (Index w : projection_widths)
        require<ConfigError>(w > 0, "projection widths must be positive");
    if (conv_stem)
        require<ConfigError>(stem_channels > 0, "stem_channels must be positive");
}

namespace {

Tensor init_weight(Index fan_in, Index fan_out, Rng& rng)
{
    Tensor w({fan_in, fan_out});
    const Scalar bound = 1.0 / std::sqrt(static_cast<Scalar>(fan_in));
    for (Index i = 0; i < w.numel(); ++i) w.data[i] = rng.uniform(-bound, bound);
    return w;
}

struct LayerDims {
    std::vector<std::pair<Index, Index>> trunk; // (in, out) per affine layer
    std::vector<std::pair<Index, Index>> proj;
};

LayerDims layer_dims(const EncoderConfig& cfg)
{
    LayerDims d;
    Index in = cfg.conv_stem ? cfg.height * cfg.width * cfg.stem_channels : cfg.input_dim();
    for (Index w : cfg.hidden_widths) {
        d.trunk.emplace_back(in, w);
        in = w;
    }
    d.trunk.emplace_back(in, cfg.feature_dim);
    in = cfg.feature_dim;
    for (Index w : cfg.projection_widths) {
        d.proj.emplace_back(in, w);
        in = w;
    }
    return d;
}

} // namespace

ParamSet init_encoder(const EncoderConfig& cfg, std::uint64_t seed)
{
    cfg.validate();
    Rng rng(derive_seed(seed, "encoder-init"));
    ParamSet ps;
    if (cfg.conv_stem) {
        ps.add("stem.k", init_weight(9 * cfg.channels, cfg.stem_channels, rng));
        ps.add("stem.b", Tensor({cfg.stem_channels}));
    }
    const LayerDims dims = layer_dims(cfg);
    for (std::size_t i = 0; i < dims.trunk.size(); ++i) {
        const std::string tag =
            i + 1 == dims.trunk.size() ? "feat" : "mlp" + std::to_string(i);
        ps.add(tag + ".w", init_weight(dims.trunk[i].first, dims.trunk[i].second, rng));
        ps.add(tag + ".b", Tensor({dims.trunk[i].second}));
    }
    for (std::size_t i = 0; i < dims.proj.size(); ++i) {
        const std::string tag = "proj" + std::to_string(i);
        ps.add(tag + ".w", init_weight(dims.proj[i].first, dims.proj[i].second, rng));
        ps.add(tag + ".b", Tensor({dims.proj[i].second}));
    }
    return ps;
}

namespace {

// One template body over mutable/const param sets; the tape overload picked
// for `params` decides whether gradients flow.
template <class ParamSetRef>
Var forward_impl(Tape& tape, ParamSetRef& params, const EncoderConfig& cfg, const Mat& batch,
                 ForwardMode mode)
{
    cfg.validate();
    require<ContractViolation>(batch.cols() == cfg.input_dim(),
                               "batch row length does not match encoder input " +
                                   std::to_string(cfg.input_dim()));
    Var x = tape.constant(batch);
    if (cfg.conv_stem) {
        Var k = tape.param(params, "stem.k");
        Var b = tape.param(params, "stem.b");
        x = relu(conv3x3_same(x, k, b, cfg.height, cfg.width, cfg.channels,
                              cfg.stem_channels));
    }
    const std::size_t trunk_layers = cfg.hidden_widths.size() + 1;
    for (std::size_t i = 0; i < trunk_layers; ++i) {
        const std::string tag = i + 1 == trunk_layers ? "feat" : "mlp" + std::to_string(i);
        x = affine(x, tape.param(params, tag + ".w"), tape.param(params, tag + ".b"));
        if (i + 1 < trunk_layers) x = relu(x);
    }
    if (mode == ForwardMode::backbone) return x;
    for (std::size_t i = 0; i < cfg.projection_widths.size(); ++i) {
        const std::string tag = "proj" + std::to_string(i);
        if (i > 0) x = relu(x);
        x = affine(x, tape.param(params, tag + ".w"), tape.param(params, tag + ".b"));
    }
    return l2_normalize_rows(x);
}

} // namespace

Var encoder_forward(Tape& tape, ParamSet& params, const EncoderConfig& cfg, const Mat& batch,
                    ForwardMode mode)
{
    return forward_impl(tape, params, cfg, batch, mode);
}

Var encoder_forward(Tape& tape, const ParamSet& params, const EncoderConfig& cfg,
                    const Mat& batch, ForwardMode mode)
{
    return forward_impl(tape, params, cfg, batch, mode);
}

Mat encoder_features(const ParamSet& params, const EncoderConfig& cfg, const Mat& batch,
                     ForwardMode mode)
{
    Tape tape;
    return tape.value(encoder_forward(tape, params, cfg, batch, mode));
}

} // namespace clab::nn
