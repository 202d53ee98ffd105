// SPDX-License-Identifier: Apache-2.0
#ifndef CLAB_CONTRASTIVE_MOCO_HPP
#define CLAB_CONTRASTIVE_MOCO_HPP

#include "clab/contrastive/info_nce.hpp"
#include "clab/contrastive/key_queue.hpp"
#include "clab/data/pair_sampler.hpp"
#include "clab/nn/encoder.hpp"
#include "clab/nn/optim.hpp"

#include <filesystem>
#include <optional>

namespace clab::moco {

/// Query encoder plus its gradient-free EMA copy. Both sets share names and
/// shapes; the key encoder never receives gradients.
struct MomentumPair {
    nn::ParamSet query;
    nn::ParamSet key;
    Scalar ema = 0.99;
};

MomentumPair make_momentum_pair(const nn::EncoderConfig& cfg, std::uint64_t seed, Scalar ema);

/// key <- ema * key + (1 - ema) * query, elementwise for every parameter.
void ema_update(MomentumPair& pair);
void ema_update(nn::ParamSet& key, const nn::ParamSet& query, Scalar ema);

struct ContrastiveConfig {
    Scalar temperature = 0.2;
    Index queue_capacity = 1024; // desk-scale default; 65536 at full scale
    Scalar ema = 0.99;
    data::PairMode mode = data::PairMode::moco;
    bool mask_false_negatives = false;

    void validate() const;
};

/// One minibatch of positive pairs, rows aligned across the three fields.
struct PairBatch {
    Mat query_views;
    Mat key_views;
    std::vector<std::int64_t> location_ids;
};

/// One training step, in order: EMA update; key encoding (gradient-free,
/// normalized); query encoding; mean InfoNCE against the current queue
/// (masking per config); backward + SGD on the query encoder only; enqueue
/// of the new keys. Returns the mean loss.
Scalar moco_step(MomentumPair& pair, KeyQueue& queue, const PairBatch& batch,
                 const ContrastiveConfig& cfg, const nn::EncoderConfig& encoder_cfg,
                 const nn::SgdConfig& opt, Scalar lr);

struct PretrainConfig {
    nn::EncoderConfig encoder;
    ContrastiveConfig contrastive;
    nn::SgdConfig optimizer;
    data::AugmentationPolicy augment;
    Scalar base_lr = 3e-2;
    Index epochs = 30;
    Index batch_size = 64;
    std::uint64_t seed = 1;

    void validate() const;
};

struct PretrainResult {
    std::vector<Scalar> epoch_losses;
    Index epochs_done = 0;
};

/// Called after each epoch's checkpoint is written; returning false stops
/// the run early (it can be resumed later).
using EpochCallback = std::function<bool(Index epoch, Scalar mean_loss)>;

/// Runs the full pretraining loop with a cosine rate over all steps, writing
/// the checkpoint (and a JSON sidecar with config, seed and loss history)
/// after every epoch. With resume=true and an existing checkpoint at `path`,
/// continues from the stored epoch; the resumed trajectory is bit-identical
/// to an uninterrupted run because every epoch draws its randomness from a
/// seed derived as (seed, epoch).
PretrainResult pretrain(const data::UnlabeledDataset& ds, const PretrainConfig& cfg,
                        const std::filesystem::path& path, bool resume = false,
                        const EpochCallback& on_epoch = {});

/// Checkpoint contents produced by pretrain().
struct PretrainState {
    MomentumPair pair;
    KeyQueue queue;
    PretrainConfig config;
    std::vector<Scalar> epoch_losses;
    Index epochs_done = 0;
};

PretrainState load_pretrain_state(const std::filesystem::path& path);

/// Loads just the query encoder and its architecture from a checkpoint.
std::pair<nn::ParamSet, nn::EncoderConfig> load_encoder(const std::filesystem::path& path);

} // namespace clab::moco

#endif // CLAB_CONTRASTIVE_MOCO_HPP
