// SPDX-License-Identifier: Apache-2.0
#include "clab/bench/benchmark.hpp"

#include "clab/bench/report_io.hpp"
#include "clab/bench/subsample.hpp"
#include "clab/config_json.hpp"
#include "clab/data/folder_io.hpp"
#include "clab/eval/knn.hpp"
#include "clab/nn/checkpoint.hpp"

#include <atomic>
#include <chrono>
#include <map>
#include <thread>

namespace clab::bench {

namespace fs = std::filesystem;

void supervised_pretrain(const data::Dataset& ds, std::span<const Index> indices,
                         const SupervisedPretrainConfig& cfg,
                         const fs::path& checkpoint_path)
{
    cfg.encoder.validate();
    require<ConfigError>(cfg.epochs >= 0, "epochs must be non-negative");
    require<ConfigError>(cfg.batch_size >= 1, "batch_size must be >= 1");
    require<ConfigError>(!indices.empty(), "supervised pretraining needs labeled samples");

    nn::ParamSet encoder = nn::init_encoder(cfg.encoder, cfg.seed);
    const std::vector<int> labels = ds.labels(indices);
    Index num_classes = 0;
    for (int y : labels) num_classes = std::max<Index>(num_classes, y + 1);
    require<ConfigError>(num_classes >= 2, "supervised pretraining needs >= 2 classes");
    eval::LinearHead head = eval::LinearHead::init(cfg.encoder.feature_dim, num_classes,
                                                   derive_seed(cfg.seed, "sup-head"));

    const Index n = static_cast<Index>(indices.size());
    const Index steps_per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;
    const nn::LrSchedule schedule =
        nn::LrSchedule::cosine(cfg.base_lr, std::max<Index>(1, cfg.epochs * steps_per_epoch));

    std::vector<Index> order(indices.begin(), indices.end());
    for (Index epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng rng(derive_seed(cfg.seed, "sup-epoch", static_cast<std::uint64_t>(epoch)));
        rng.shuffle(order);
        Index step = 0;
        for (Index start = 0; start < n; start += cfg.batch_size, ++step) {
            const Index b = std::min(cfg.batch_size, n - start);
            Mat x(b, ds.pixels());
            std::vector<int> y(static_cast<std::size_t>(b));
            for (Index r = 0; r < b; ++r) {
                const Index sample = order[static_cast<std::size_t>(start + r)];
                x.row(r) = data::augment(ds[sample].image, ds.height(), ds.width(),
                                         ds.channels(), cfg.augment, rng)
                               .transpose();
                y[static_cast<std::size_t>(r)] = ds[sample].label;
            }
            nn::Tape tape;
            nn::Var feats =
                nn::encoder_forward(tape, encoder, cfg.encoder, x, nn::ForwardMode::backbone);
            nn::Var logits = nn::affine(feats, tape.param(head.params, "w"),
                                        tape.param(head.params, "b"));
            nn::Var loss = nn::softmax_cross_entropy(logits, y);
            tape.backward(loss);
            const Scalar lr = schedule_rate(schedule, epoch * steps_per_epoch + step);
            nn::sgd_step(encoder, lr, cfg.optimizer);
            nn::sgd_step(head.params, lr, cfg.optimizer);
            encoder.zero_grads();
            head.params.zero_grads();
        }
    }

    // Stored in the shared checkpoint layout; the head rides along for
    // provenance but downstream consumers read only the backbone.
    if (checkpoint_path.has_parent_path())
        fs::create_directories(checkpoint_path.parent_path());
    nn::NamedTensors tensors;
    for (const auto& name : encoder.names())
        tensors.emplace_back("q." + name, encoder.at(name));
    tensors.emplace_back("head.w", head.params.at("w"));
    tensors.emplace_back("head.b", head.params.at("b"));
    nn::save_tensor_file(checkpoint_path, tensors);

    cfg::json side;
    side["schema_version"] = 1;
    side["kind"] = "supervised";
    side["seed"] = cfg.seed;
    side["epochs_done"] = cfg.epochs;
    side["epochs_target"] = cfg.epochs;
    side["config"]["encoder"] = cfg::to_json(cfg.encoder);
    side["config"]["optimizer"] = cfg::to_json(cfg.optimizer);
    side["config"]["augment"] = cfg::to_json(cfg.augment);
    side["config"]["base_lr"] = cfg.base_lr;
    side["config"]["batch_size"] = cfg.batch_size;
    fs::path sidecar = checkpoint_path;
    sidecar += ".json";
    cfg::write_json_file(side, sidecar);
}

data::Dataset open_dataset(const ExperimentConfig& cfg)
{
    if (const auto* spec = std::get_if<data::SyntheticSpec>(&cfg.dataset))
        return data::generate_synthetic(*spec);
    return data::load_folder(std::get<fs::path>(cfg.dataset));
}

std::string record_filename(Variant v, Protocol p, Scalar fraction, Index repeat)
{
    char frac[32];
    std::snprintf(frac, sizeof(frac), "%g", fraction);
    return variant_name(v) + "_" + protocol_name(p) + "_f" + frac + "_r" +
           std::to_string(repeat) + ".json";
}

namespace {

struct Cell {
    Variant variant;
    Protocol protocol;
    Scalar fraction;
    Index repeat;
};

struct VariantAssets {
    nn::ParamSet encoder;
    nn::EncoderConfig encoder_cfg;
    Mat all_features; // frozen backbone features for every dataset row
};

Index effective_k(const KnnConfig& cfg, Index bank_size)
{
    return std::max<Index>(1, std::min(cfg.k, bank_size / 2));
}

RunRecord run_cell(const ExperimentConfig& cfg, const data::Dataset& ds,
                   const std::vector<Index>& train_pool, const std::vector<Index>& eval_idx,
                   const std::map<Variant, VariantAssets>& assets, const Cell& cell)
{
    RunRecord rec;
    rec.variant = cell.variant;
    rec.protocol = cell.protocol;
    rec.fraction = cell.fraction;
    rec.repeat = cell.repeat;
    rec.seed = subset_seed(cfg.seed, cell.fraction, cell.repeat);

    const VariantAssets& va = assets.at(cell.variant);
    const Index num_classes = ds.num_classes();
    const std::vector<int> eval_labels = ds.labels(eval_idx);

    Rng subset_rng(rec.seed);
    const std::vector<Index> subset =
        stratified_subsample(ds, train_pool, cell.fraction, subset_rng);
    Rng split_rng(derive_seed(rec.seed, "val-split"));
    auto [train_idx, val_idx] = split_train_val(ds, subset, 0.2, split_rng);
    if (val_idx.empty()) val_idx = train_idx; // degenerate tiny subsets

    auto slice = [&](std::span<const Index> rows) {
        eval::FeatureBank bank;
        bank.features.resize(static_cast<Index>(rows.size()), va.all_features.cols());
        for (std::size_t i = 0; i < rows.size(); ++i)
            bank.features.row(static_cast<Index>(i)) = va.all_features.row(rows[i]);
        bank.labels = ds.labels(rows);
        return bank;
    };

    switch (cell.protocol) {
    case Protocol::knn: {
        const eval::FeatureBank bank = slice(subset);
        const eval::FeatureBank queries = slice(eval_idx);
        const Index k = effective_k(cfg.knn, bank.size());
        const std::vector<int> preds =
            eval::knn_predict(bank, queries.features, k, cfg.knn.vote_temperature);
        rec.eval_metrics = eval::compute_metrics(preds, eval_labels, num_classes);
        rec.selection_metrics = rec.eval_metrics;
        break;
    }
    case Protocol::linear: {
        eval::ClassifierConfig ccfg = cfg.linear;
        ccfg.seed = derive_seed(rec.seed, "linear");
        const eval::FeatureBank bank_train = slice(train_idx);
        const eval::FeatureBank bank_val = slice(val_idx);
        const eval::ProbeResult probe =
            eval::linear_probe(bank_train, bank_val, ccfg, num_classes);
        rec.selection_metrics = probe.val_metrics;
        rec.best_epoch = probe.best_epoch;
        const eval::FeatureBank eval_bank = slice(eval_idx);
        rec.eval_metrics = eval::compute_metrics(probe.head.predict(eval_bank.features),
                                                 eval_labels, num_classes);
        break;
    }
    case Protocol::finetune: {
        eval::ClassifierConfig ccfg = cfg.finetune;
        ccfg.seed = derive_seed(rec.seed, "finetune");
        const eval::FinetuneResult ft =
            eval::finetune(va.encoder, va.encoder_cfg, ds, train_idx, val_idx, ccfg,
                           cfg.pretrain.augment, num_classes);
        rec.selection_metrics = ft.val_metrics;
        rec.best_epoch = ft.best_epoch;
        const eval::FeatureBank eval_bank =
            eval::extract_features(ft.encoder, va.encoder_cfg, ds, eval_idx);
        rec.eval_metrics = eval::compute_metrics(ft.head.predict(eval_bank.features),
                                                 eval_labels, num_classes);
        break;
    }
    }
    return rec;
}

} // namespace

MetricsReport run_benchmark(const ExperimentConfig& cfg, const fs::path& out_dir)
{
    cfg.validate();
    fs::create_directories(out_dir);
    fs::create_directories(out_dir / "checkpoints");
    fs::create_directories(out_dir / "records");
    cfg::write_json_file(cfg::to_json(cfg), out_dir / "config.json");

    const data::Dataset ds = open_dataset(cfg);
    require<ConfigError>(ds.num_classes() >= 2, "benchmark dataset needs >= 2 classes");

    Rng holdout_rng(derive_seed(cfg.seed, "holdout"));
    const auto [train_pool, eval_idx] = stratified_holdout(ds, cfg.eval_holdout, holdout_rng);
    require<ConfigError>(!eval_idx.empty(), "eval holdout is empty; enlarge the dataset");

    // Every class must be represented in the pool.
    std::vector<bool> present(static_cast<std::size_t>(ds.num_classes()), false);
    for (Index i : train_pool) present[static_cast<std::size_t>(ds[i].label)] = true;
    for (std::size_t c = 0; c < present.size(); ++c)
        require<ConfigError>(present[c],
                             "class " + std::to_string(c) + " has no training samples");

    // Phase 1: one pretraining per variant (resumable, skipped when done).
    std::map<Variant, VariantAssets> assets;
    for (Variant v : cfg.variants) {
        const fs::path ckpt = out_dir / "checkpoints" / (variant_name(v) + ".clab");
        const std::uint64_t seed = derive_seed(cfg.seed, "pretrain", fnv1a(variant_name(v)));
        if (v == Variant::supervised) {
            if (!fs::exists(ckpt)) {
                SupervisedPretrainConfig scfg;
                scfg.encoder = cfg.pretrain.encoder;
                scfg.optimizer = cfg.pretrain.optimizer;
                scfg.augment = cfg.pretrain.augment;
                scfg.base_lr = cfg.pretrain.base_lr;
                scfg.epochs = cfg.supervised_epochs;
                scfg.batch_size = cfg.pretrain.batch_size;
                scfg.seed = seed;
                supervised_pretrain(ds, train_pool, scfg, ckpt);
            }
        } else {
            moco::PretrainConfig pcfg = cfg.pretrain;
            pcfg.seed = seed;
            if (v == Variant::none) pcfg.epochs = 0;
            pcfg.contrastive.mode =
                v == Variant::mocotp ? data::PairMode::mocotp : data::PairMode::moco;
            if (v != Variant::mocotp) pcfg.contrastive.mask_false_negatives = false;
            // SSL sees the training pool through the label-free interface.
            const data::Dataset pool_ds = [&] {
                data::Dataset sub(ds.height(), ds.width(), ds.channels());
                for (Index i : train_pool) sub.add(ds[i]);
                return sub;
            }();
            moco::pretrain(data::UnlabeledDataset(pool_ds), pcfg, ckpt, true);
        }
        auto [encoder, ecfg] = moco::load_encoder(ckpt);
        VariantAssets va{std::move(encoder), std::move(ecfg), {}};
        va.all_features =
            eval::extract_features(va.encoder, va.encoder_cfg, ds).features;
        assets.emplace(v, std::move(va));
    }

    // Phase 2: independent grid cells.
    std::vector<Cell> cells;
    for (Variant v : cfg.variants)
        for (Scalar f : cfg.fractions) {
            const Index repeats = f == 1.0 ? 1 : cfg.repeats; // no MC variance at 100%
            for (Index r = 0; r < repeats; ++r)
                for (Protocol p : cfg.protocols) cells.push_back({v, p, f, r});
        }

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            const Cell& cell = cells[i];
            const fs::path path =
                out_dir / "records" /
                record_filename(cell.variant, cell.protocol, cell.fraction, cell.repeat);
            if (fs::exists(path)) {
                try {
                    if (load_record_json(path).status == "ok") continue;
                } catch (const Error&) {
                    // unreadable record: recompute below
                }
            }
            RunRecord rec;
            const auto t0 = std::chrono::steady_clock::now();
            try {
                rec = run_cell(cfg, ds, train_pool, eval_idx, assets, cell);
            } catch (const std::exception& e) {
                rec.variant = cell.variant;
                rec.protocol = cell.protocol;
                rec.fraction = cell.fraction;
                rec.repeat = cell.repeat;
                rec.seed = subset_seed(cfg.seed, cell.fraction, cell.repeat);
                rec.status = "failed";
                rec.error = e.what();
            }
            rec.wall_seconds =
                std::chrono::duration<Scalar>(std::chrono::steady_clock::now() - t0).count();
            write_record_json(rec, path);
        }
    };
    const std::size_t n_threads =
        std::min<std::size_t>(static_cast<std::size_t>(cfg.jobs), cells.size());
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    // Phase 3: single-writer merge.
    std::vector<RunRecord> records;
    for (const Cell& cell : cells) {
        const fs::path path =
            out_dir / "records" /
            record_filename(cell.variant, cell.protocol, cell.fraction, cell.repeat);
        if (fs::exists(path)) records.push_back(load_record_json(path));
    }
    MetricsReport report = aggregate(records);
    report.master_seed = cfg.seed;
    write_report_json(report, out_dir / "report.json");
    write_tables(report, out_dir / "tables");
    return report;
}

} // namespace clab::bench
