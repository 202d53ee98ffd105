// SPDX-License-Identifier: Apache-2.0
#include "clab/eval/classifier.hpp"

#include "clab/nn/tape.hpp"

#include <cmath>

namespace clab::eval {

LinearHead LinearHead::init(Index feature_dim, Index num_classes, std::uint64_t seed)
{
    require<ConfigError>(feature_dim >= 1 && num_classes >= 2,
                         "head needs feature_dim >= 1 and num_classes >= 2");
    Rng rng(derive_seed(seed, "head-init"));
    nn::Tensor w({feature_dim, num_classes});
    const Scalar bound = 1.0 / std::sqrt(static_cast<Scalar>(feature_dim));
    for (Index i = 0; i < w.numel(); ++i) w.data[i] = rng.uniform(-bound, bound);
    LinearHead head;
    head.params.add("w", std::move(w));
    head.params.add("b", nn::Tensor({num_classes}));
    return head;
}

Mat LinearHead::logits(const Mat& features) const
{
    const auto& w = params.at("w");
    const auto& b = params.at("b");
    require<ContractViolation>(features.cols() == w.shape[0],
                               "feature dimension does not match the head");
    Mat z = features * w.matrix();
    z.rowwise() += b.matrix().row(0);
    return z;
}

std::vector<int> LinearHead::predict(const Mat& features) const
{
    const Mat z = logits(features);
    std::vector<int> out(static_cast<std::size_t>(z.rows()));
    for (Index r = 0; r < z.rows(); ++r) {
        int best = 0;
        for (Index c = 1; c < z.cols(); ++c)
            if (z(r, c) > z(r, best)) best = static_cast<int>(c);
        out[static_cast<std::size_t>(r)] = best;
    }
    return out;
}

void ClassifierConfig::validate() const
{
    require<ConfigError>(head_lr > 0.0, "head_lr must be positive");
    require<ConfigError>(backbone_lr >= 0.0, "backbone_lr must be non-negative");
    require<ConfigError>(momentum >= 0.0 && momentum < 1.0, "momentum must be in [0,1)");
    require<ConfigError>(weight_decay >= 0.0, "weight_decay must be non-negative");
    require<ConfigError>(batch_size >= 1, "batch_size must be >= 1");
    require<ConfigError>(max_epochs >= 0, "max_epochs must be non-negative");
    require<ConfigError>(plateau_patience >= 1, "plateau_patience must be >= 1");
    require<ConfigError>(plateau_factor > 0.0 && plateau_factor < 1.0,
                         "plateau_factor must be in (0,1)");
    require<ConfigError>(early_stop_patience >= 1, "early_stop_patience must be >= 1");
}

namespace {

Scalar cross_entropy_value(const Mat& logits, std::span<const int> labels)
{
    Scalar total = 0.0;
    for (Index r = 0; r < logits.rows(); ++r) {
        const Scalar m = logits.row(r).maxCoeff();
        const Scalar lse = m + std::log((logits.row(r).array() - m).exp().sum());
        total += lse - logits(r, labels[static_cast<std::size_t>(r)]);
    }
    return total / static_cast<Scalar>(logits.rows());
}

struct EpochEval {
    Scalar loss = 0.0;
    Metrics metrics;
};

EpochEval evaluate_head(const LinearHead& head, const Mat& features,
                        std::span<const int> labels, Index num_classes)
{
    EpochEval e;
    const Mat z = head.logits(features);
    e.loss = cross_entropy_value(z, labels);
    e.metrics = compute_metrics(head.predict(features), labels, num_classes);
    return e;
}

// One engine for both evaluation protocols. The frozen path slices
// precomputed features; the live path re-encodes each batch (optionally
// augmented) and also steps the backbone optimizer. With backbone_lr = 0 and
// no augmentation the two paths see identical head gradient streams.
struct Engine {
    const ClassifierConfig& cfg;
    Index num_classes;

    // frozen path
    const Mat* train_features = nullptr;
    // live path
    nn::ParamSet* encoder = nullptr;
    const nn::EncoderConfig* encoder_cfg = nullptr;
    const data::Dataset* ds = nullptr;
    std::span<const Index> train_indices;
    const data::AugmentationPolicy* augment = nullptr;

    std::span<const int> train_labels;

    LinearHead head;
    Index best_epoch = -1;
    Metrics best_metrics;
    nn::ParamSet best_head_params;
    nn::ParamSet best_encoder_params;
    std::vector<Scalar> val_losses;

    Mat batch_features_frozen(std::span<const Index> rows)
    {
        Mat x(static_cast<Index>(rows.size()), train_features->cols());
        for (std::size_t i = 0; i < rows.size(); ++i)
            x.row(static_cast<Index>(i)) = train_features->row(rows[i]);
        return x;
    }

    Mat batch_images(std::span<const Index> rows, Rng& aug_rng)
    {
        Mat x(static_cast<Index>(rows.size()), ds->pixels());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const Index sample = train_indices[static_cast<std::size_t>(rows[i])];
            if (augment) {
                x.row(static_cast<Index>(i)) =
                    data::augment((*ds)[sample].image, ds->height(), ds->width(),
                                  ds->channels(), *augment, aug_rng)
                        .transpose();
            } else {
                x.row(static_cast<Index>(i)) = (*ds)[sample].image.transpose();
            }
        }
        return x;
    }

    template <class EvalFn>
    void run(EvalFn&& evaluate_epoch)
    {
        cfg.validate();
        const Index n = static_cast<Index>(train_labels.size());
        require<ContractViolation>(n > 0, "no training samples");
        const Index feat_dim =
            train_features ? train_features->cols() : encoder_cfg->feature_dim;
        head = LinearHead::init(feat_dim, num_classes, cfg.seed);

        if (cfg.max_epochs == 0) {
            const EpochEval e = evaluate_epoch(head, *this);
            best_metrics = e.metrics;
            best_epoch = -1;
            snapshot();
            return;
        }

        const nn::LrSchedule head_sched = nn::LrSchedule::plateau(
            cfg.head_lr, cfg.plateau_patience, cfg.plateau_factor, cfg.plateau_min_delta);

        std::vector<Index> order(static_cast<std::size_t>(n));
        for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;

        Scalar best_stop_loss = std::numeric_limits<Scalar>::infinity();
        Index stale = 0;
        Scalar best_accuracy = -1.0;

        for (Index epoch = 0; epoch < cfg.max_epochs; ++epoch) {
            const Scalar head_lr = schedule_rate(head_sched, epoch, val_losses);
            const Scalar backbone_lr =
                cfg.backbone_lr > 0.0
                    ? head_lr * (cfg.backbone_lr / cfg.head_lr)
                    : 0.0;
            Rng order_rng(derive_seed(cfg.seed, "order", static_cast<std::uint64_t>(epoch)));
            order_rng.shuffle(order);
            Rng aug_rng(derive_seed(cfg.seed, "aug", static_cast<std::uint64_t>(epoch)));

            try {
                for (Index start = 0; start < n; start += cfg.batch_size) {
                    const std::size_t count = static_cast<std::size_t>(
                        std::min(cfg.batch_size, n - start));
                    std::span<const Index> rows(order.data() + start, count);
                    std::vector<int> y(count);
                    for (std::size_t i = 0; i < count; ++i)
                        y[i] = train_labels[static_cast<std::size_t>(rows[i])];

                    nn::Tape tape;
                    nn::Var feats;
                    if (train_features) {
                        feats = tape.constant(batch_features_frozen(rows));
                    } else {
                        const Mat x = batch_images(rows, aug_rng);
                        feats = nn::encoder_forward(tape, *encoder, *encoder_cfg, x,
                                                    nn::ForwardMode::backbone);
                    }
                    nn::Var logits = nn::affine(feats, tape.param(head.params, "w"),
                                                tape.param(head.params, "b"));
                    nn::Var loss = nn::softmax_cross_entropy(logits, y);
                    tape.backward(loss);
                    nn::sgd_step(head.params, head_lr,
                                 {cfg.momentum, cfg.weight_decay});
                    head.params.zero_grads();
                    if (encoder) {
                        nn::sgd_step(*encoder, backbone_lr, {cfg.momentum, cfg.weight_decay});
                        encoder->zero_grads();
                    }
                }

                const EpochEval e = evaluate_epoch(head, *this);
                require<NumericError>(std::isfinite(e.loss), "validation loss diverged");
                val_losses.push_back(e.loss);
                if (e.metrics.top1_accuracy > best_accuracy) {
                    best_accuracy = e.metrics.top1_accuracy;
                    best_metrics = e.metrics;
                    best_epoch = epoch;
                    snapshot();
                }
                if (e.loss < best_stop_loss - cfg.plateau_min_delta) {
                    best_stop_loss = e.loss;
                    stale = 0;
                } else if (++stale >= cfg.early_stop_patience) {
                    break;
                }
            } catch (const NumericError& err) {
                throw NumericError("epoch " + std::to_string(epoch) + ": " + err.what());
            }
        }
    }

    void snapshot()
    {
        best_head_params = head.params;
        if (encoder) best_encoder_params = *encoder;
    }
};

} // namespace

ProbeResult linear_probe(const FeatureBank& train, const FeatureBank& val,
                         const ClassifierConfig& cfg, Index num_classes)
{
    train.validate();
    val.validate();
    require<ContractViolation>(train.dim() == val.dim(),
                               "train and validation feature dims differ");

    Engine engine{cfg, num_classes};
    engine.train_features = &train.features;
    engine.train_labels = train.labels;
    engine.run([&val, num_classes](const LinearHead& head, Engine&) {
        return evaluate_head(head, val.features, val.labels, num_classes);
    });

    ProbeResult result;
    result.head.params = std::move(engine.best_head_params);
    result.val_metrics = engine.best_metrics;
    result.best_epoch = engine.best_epoch;
    result.val_losses = std::move(engine.val_losses);
    return result;
}

FinetuneResult finetune(const nn::ParamSet& encoder, const nn::EncoderConfig& encoder_cfg,
                        const data::Dataset& ds, std::span<const Index> train_indices,
                        std::span<const Index> val_indices, const ClassifierConfig& cfg,
                        const std::optional<data::AugmentationPolicy>& augment,
                        Index num_classes)
{
    require<ContractViolation>(!val_indices.empty(), "finetune needs a validation split");
    nn::ParamSet work = encoder;
    const std::vector<int> train_labels = ds.labels(train_indices);
    const std::vector<int> val_labels = ds.labels(val_indices);
    const Mat val_images = ds.gather(val_indices);

    Engine engine{cfg, num_classes};
    engine.encoder = &work;
    engine.encoder_cfg = &encoder_cfg;
    engine.ds = &ds;
    engine.train_indices = train_indices;
    engine.augment = augment ? &*augment : nullptr;
    engine.train_labels = train_labels;
    engine.run([&](const LinearHead& head, Engine& self) {
        const Mat val_feats = nn::encoder_features(*self.encoder, *self.encoder_cfg,
                                                   val_images, nn::ForwardMode::backbone);
        return evaluate_head(head, val_feats, val_labels, num_classes);
    });

    FinetuneResult result;
    result.encoder = std::move(engine.best_encoder_params);
    result.head.params = std::move(engine.best_head_params);
    result.val_metrics = engine.best_metrics;
    result.best_epoch = engine.best_epoch;
    result.val_losses = std::move(engine.val_losses);
    return result;
}

} // namespace clab::eval
