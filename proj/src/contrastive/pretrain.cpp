// SPDX-License-Identifier: Apache-2.0
#include "clab/config_json.hpp"
#include "clab/contrastive/moco.hpp"
#include "clab/nn/checkpoint.hpp"

#include <fstream>

namespace clab::moco {

namespace {

std::filesystem::path sidecar_path(const std::filesystem::path& checkpoint)
{
    std::filesystem::path p = checkpoint;
    p += ".json";
    return p;
}

nn::NamedTensors collect_state(const PretrainState& st)
{
    nn::NamedTensors out;
    const nn::ParamSet& q = st.pair.query;
    for (const auto& name : q.names()) out.emplace_back("q." + name, q.at(name));
    for (const auto& name : st.pair.key.names())
        out.emplace_back("k." + name, st.pair.key.at(name));
    for (std::size_t i = 0; i < q.size(); ++i) {
        nn::Tensor v = q.at(i);
        v.data = q.momentum(i);
        v.clear_grad();
        out.emplace_back("opt.v." + q.names()[i], std::move(v));
    }
    nn::Tensor step({1});
    step.data[0] = static_cast<Scalar>(q.step());
    out.emplace_back("opt.step", std::move(step));
    if (st.queue.size() > 0) {
        out.emplace_back("queue.embeddings", nn::Tensor::from_matrix(st.queue.embeddings()));
        const auto ids = st.queue.location_ids();
        nn::Tensor idt({static_cast<Index>(ids.size())});
        for (std::size_t i = 0; i < ids.size(); ++i)
            idt.data[static_cast<Index>(i)] = static_cast<Scalar>(ids[i]);
        out.emplace_back("queue.location_ids", std::move(idt));
    }
    return out;
}

void write_state(const PretrainState& st, const std::filesystem::path& path)
{
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    nn::save_tensor_file(path, collect_state(st));

    cfg::json side;
    side["schema_version"] = 1;
    side["kind"] = st.config.contrastive.mode == data::PairMode::mocotp ? "mocotp" : "moco";
    side["seed"] = st.config.seed;
    side["epochs_done"] = st.epochs_done;
    side["epochs_target"] = st.config.epochs;
    side["loss_history"] = st.epoch_losses;
    side["config"] = cfg::to_json(st.config);
    cfg::write_json_file(side, sidecar_path(path));
}

} // namespace

PretrainState load_pretrain_state(const std::filesystem::path& path)
{
    const cfg::json side = cfg::load_json_file(sidecar_path(path));
    require<IngestError>(side.contains("config"), "checkpoint sidecar lacks a config");
    PretrainConfig cfg = cfg::pretrain_from_json(side.at("config"), "config");

    PretrainState st{make_momentum_pair(cfg.encoder, cfg.seed, cfg.contrastive.ema),
                     KeyQueue(cfg.contrastive.queue_capacity, cfg.encoder.proj_dim()),
                     cfg,
                     {},
                     0};
    st.epochs_done = side.value("epochs_done", 0);
    st.epoch_losses = side.value("loss_history", std::vector<Scalar>{});

    Mat queue_embeddings;
    std::vector<std::int64_t> queue_ids;
    for (auto& [name, tensor] : nn::load_tensor_file(path)) {
        if (name.rfind("q.", 0) == 0) {
            st.pair.query.at(name.substr(2)).data = tensor.data;
        } else if (name.rfind("k.", 0) == 0) {
            st.pair.key.at(name.substr(2)).data = tensor.data;
        } else if (name.rfind("opt.v.", 0) == 0) {
            st.pair.query.momentum(name.substr(6)) = tensor.data;
        } else if (name == "opt.step") {
            st.pair.query.set_step(static_cast<std::uint64_t>(tensor.data[0]));
        } else if (name == "queue.embeddings") {
            queue_embeddings = tensor.matrix();
        } else if (name == "queue.location_ids") {
            queue_ids.resize(static_cast<std::size_t>(tensor.numel()));
            for (Index i = 0; i < tensor.numel(); ++i)
                queue_ids[static_cast<std::size_t>(i)] =
                    static_cast<std::int64_t>(tensor.data[i]);
        }
    }
    if (queue_embeddings.rows() > 0) st.queue.enqueue(queue_embeddings, queue_ids);
    return st;
}

std::pair<nn::ParamSet, nn::EncoderConfig> load_encoder(const std::filesystem::path& path)
{
    const cfg::json side = cfg::load_json_file(sidecar_path(path));
    require<IngestError>(side.contains("config"), "checkpoint sidecar lacks a config");
    const cfg::json& conf = side.at("config");
    nn::EncoderConfig ecfg = cfg::encoder_from_json(
        conf.contains("encoder") ? conf.at("encoder") : cfg::json::object(), "config.encoder");
    nn::ParamSet params = nn::init_encoder(ecfg, 0);
    std::size_t loaded = 0;
    for (auto& [name, tensor] : nn::load_tensor_file(path)) {
        if (name.rfind("q.", 0) != 0) continue;
        const std::string key = name.substr(2);
        require<IngestError>(params.has(key), "unexpected tensor in checkpoint: " + name);
        require<ContractViolation>(params.at(key).shape == tensor.shape,
                                   "checkpoint architecture mismatch at " + name);
        params.at(key).data = tensor.data;
        ++loaded;
    }
    require<IngestError>(loaded == params.size(),
                         "checkpoint is missing encoder tensors: " + path.string());
    return {std::move(params), std::move(ecfg)};
}

PretrainResult pretrain(const data::UnlabeledDataset& ds, const PretrainConfig& cfg,
                        const std::filesystem::path& path, bool resume,
                        const EpochCallback& on_epoch)
{
    cfg.validate();
    require<ConfigError>(ds.size() > 0, "cannot pretrain on an empty dataset");
    require<ConfigError>(ds.height() == cfg.encoder.height &&
                             ds.width() == cfg.encoder.width &&
                             ds.channels() == cfg.encoder.channels,
                         "dataset image size does not match the encoder input");

    PretrainState st{make_momentum_pair(cfg.encoder, cfg.seed, cfg.contrastive.ema),
                     KeyQueue(cfg.contrastive.queue_capacity, cfg.encoder.proj_dim()),
                     cfg,
                     {},
                     0};
    if (resume && std::filesystem::exists(path)) {
        PretrainState prev = load_pretrain_state(path);
        require<ConfigError>(prev.config.seed == cfg.seed,
                             "resume seed differs from the stored checkpoint");
        if (prev.epochs_done >= cfg.epochs) {
            return {prev.epoch_losses, prev.epochs_done};
        }
        st = std::move(prev);
        st.config = cfg;
    }

    const Index n = ds.size();
    const Index steps_per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;
    const nn::LrSchedule schedule =
        nn::LrSchedule::cosine(cfg.base_lr, std::max<Index>(1, cfg.epochs * steps_per_epoch));

    std::vector<Index> order(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;

    for (Index epoch = st.epochs_done; epoch < cfg.epochs; ++epoch) {
        Rng rng(derive_seed(cfg.seed, "epoch", static_cast<std::uint64_t>(epoch)));
        rng.shuffle(order);
        Scalar loss_sum = 0.0;
        Index step_in_epoch = 0;
        for (Index start = 0; start < n; start += cfg.batch_size, ++step_in_epoch) {
            const Index b = std::min(cfg.batch_size, n - start);
            PairBatch batch;
            batch.query_views.resize(b, ds.height() * ds.width() * ds.channels());
            batch.key_views.resize(b, batch.query_views.cols());
            batch.location_ids.resize(static_cast<std::size_t>(b));
            for (Index r = 0; r < b; ++r) {
                const Index anchor = order[static_cast<std::size_t>(start + r)];
                data::PairSample pair = data::sample_pair(ds, anchor, cfg.contrastive.mode,
                                                          cfg.augment, rng);
                batch.query_views.row(r) = pair.query_view.transpose();
                batch.key_views.row(r) = pair.key_view.transpose();
                batch.location_ids[static_cast<std::size_t>(r)] = pair.location_id;
            }
            const Index global_step = epoch * steps_per_epoch + step_in_epoch;
            const Scalar lr = schedule_rate(schedule, global_step);
            loss_sum += moco_step(st.pair, st.queue, batch, cfg.contrastive, cfg.encoder,
                                  cfg.optimizer, lr) *
                        static_cast<Scalar>(b);
        }
        st.epoch_losses.push_back(loss_sum / static_cast<Scalar>(n));
        st.epochs_done = epoch + 1;
        write_state(st, path);
        if (on_epoch && !on_epoch(epoch, st.epoch_losses.back())) break;
    }

    if (cfg.epochs == 0) write_state(st, path);
    return {st.epoch_losses, st.epochs_done};
}

} // namespace clab::moco
