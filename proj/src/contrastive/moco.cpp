// SPDX-License-Identifier: Apache-2.0
#include "clab/contrastive/moco.hpp"

namespace clab::moco {

MomentumPair make_momentum_pair(const nn::EncoderConfig& cfg, std::uint64_t seed, Scalar ema)
{
    MomentumPair pair;
    pair.query = nn::init_encoder(cfg, seed);
    pair.key = nn::init_encoder(cfg, seed); // identical initialization
    pair.ema = ema;
    return pair;
}

void ema_update(nn::ParamSet& key, const nn::ParamSet& query, Scalar ema)
{
    require<ContractViolation>(ema >= 0.0 && ema <= 1.0, "EMA coefficient must be in [0,1]");
    require<ContractViolation>(key.size() == query.size(),
                               "momentum pair parameter counts differ");
    for (std::size_t i = 0; i < key.size(); ++i) {
        require<ContractViolation>(key.names()[i] == query.names()[i],
                                   "momentum pair parameter names differ");
        nn::Tensor& k = key.at(i);
        const nn::Tensor& q = query.at(i);
        require<ContractViolation>(k.shape == q.shape,
                                   "momentum pair shapes differ for " + key.names()[i]);
        k.data = ema * k.data + (1.0 - ema) * q.data;
    }
}

void ema_update(MomentumPair& pair)
{
    ema_update(pair.key, pair.query, pair.ema);
}

void ContrastiveConfig::validate() const
{
    require<ConfigError>(temperature > 0.0, "temperature must be positive");
    require<ConfigError>(queue_capacity > 0, "queue capacity must be positive");
    require<ConfigError>(ema >= 0.0 && ema <= 1.0, "EMA coefficient must be in [0,1]");
}

Scalar moco_step(MomentumPair& pair, KeyQueue& queue, const PairBatch& batch,
                 const ContrastiveConfig& cfg, const nn::EncoderConfig& encoder_cfg,
                 const nn::SgdConfig& opt, Scalar lr)
{
    cfg.validate();
    const Index b = batch.query_views.rows();
    require<ContractViolation>(b > 0, "empty batch");
    require<ContractViolation>(batch.key_views.rows() == b &&
                                   static_cast<Index>(batch.location_ids.size()) == b,
                               "batch fields must align");

    ema_update(pair);

    // Key encoding is read-only on the key encoder; no gradient ever flows.
    const nn::ParamSet& frozen_key = pair.key;
    const Mat keys =
        nn::encoder_features(frozen_key, encoder_cfg, batch.key_views, nn::ForwardMode::projected);

    nn::Tape tape;
    nn::Var q = nn::encoder_forward(tape, pair.query, encoder_cfg, batch.query_views,
                                    nn::ForwardMode::projected);
    const Mat negatives = queue.embeddings();
    const std::vector<std::int64_t> negative_ids = queue.location_ids();
    nn::Var losses = info_nce(q, tape.constant(keys), negatives, negative_ids,
                              batch.location_ids, cfg.temperature, cfg.mask_false_negatives);
    nn::Var loss = nn::mean_all(losses);
    const Scalar loss_value = tape.value(loss)(0, 0);
    require<NumericError>(std::isfinite(loss_value), "non-finite contrastive loss");

    tape.backward(loss);
    nn::sgd_step(pair.query, lr, opt);
    pair.query.zero_grads();

    queue.enqueue(keys, batch.location_ids);
    return loss_value;
}

void PretrainConfig::validate() const
{
    encoder.validate();
    contrastive.validate();
    augment.validate();
    require<ConfigError>(base_lr >= 0.0, "base_lr must be non-negative");
    require<ConfigError>(epochs >= 0, "epochs must be non-negative");
    require<ConfigError>(batch_size >= 1, "batch_size must be >= 1");
    require<ConfigError>(batch_size <= contrastive.queue_capacity,
                         "batch_size must not exceed the queue capacity");
    require<ConfigError>(augment.out_height == encoder.height &&
                             augment.out_width == encoder.width,
                         "augmentation output size must match the encoder input");
}

} // namespace clab::moco
