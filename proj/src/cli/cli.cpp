// SPDX-License-Identifier: Apache-2.0
#include "clab/cli/cli.hpp"

#include "clab/bench/benchmark.hpp"
#include "clab/bench/report_io.hpp"
#include "clab/bench/subsample.hpp"
#include "clab/config_json.hpp"
#include "clab/data/folder_io.hpp"
#include "clab/eval/knn.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

namespace clab::cli {

namespace fs = std::filesystem;
using cfg::json;

namespace {

/// Seed precedence: --seed flag, then CLAB_SEED, then the config value.
std::optional<std::uint64_t> env_seed()
{
    const char* env = std::getenv("CLAB_SEED");
    if (!env || !*env) return std::nullopt;
    try {
        return static_cast<std::uint64_t>(std::stoull(env));
    } catch (const std::exception&) {
        throw ConfigError("CLAB_SEED: not an unsigned integer");
    }
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, std::uint64_t from_config)
{
    if (flag) return *flag;
    if (auto env = env_seed()) return *env;
    return from_config;
}

struct GenDataArgs {
    std::string spec_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
};

void cmd_gen_data(const GenDataArgs& args)
{
    data::SyntheticSpec spec =
        cfg::synthetic_from_json(cfg::load_json_file(args.spec_path), "spec");
    spec.seed = resolve_seed(args.seed, spec.seed);
    const data::Dataset ds = data::generate_synthetic(spec);
    fs::create_directories(args.out_dir);
    data::export_folder(ds, args.out_dir);
    json resolved = cfg::to_json(spec);
    cfg::write_json_file(resolved, fs::path(args.out_dir) / "spec.json");
    std::cout << "wrote " << ds.size() << " samples to " << args.out_dir << "\n";
}

struct PretrainArgs {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    bool resume = false;
    bool verbose = false;
};

void cmd_pretrain(const PretrainArgs& args)
{
    const json j = cfg::load_json_file(args.config_path);
    require<ConfigError>(j.is_object(), "config: expected a JSON object");
    require<ConfigError>(j.contains("dataset"),
                         "config.dataset: required ('synthetic' or 'folder')");
    json pretrain_json = j;
    pretrain_json.erase("dataset");
    moco::PretrainConfig pcfg = cfg::pretrain_from_json(pretrain_json, "config");
    pcfg.seed = resolve_seed(args.seed, pcfg.seed);

    const json& d = j.at("dataset");
    data::Dataset ds = [&] {
        if (d.contains("synthetic"))
            return data::generate_synthetic(
                cfg::synthetic_from_json(d.at("synthetic"), "config.dataset.synthetic"));
        require<ConfigError>(d.contains("folder"),
                             "config.dataset: give 'synthetic' or 'folder'");
        return data::load_folder(d.at("folder").get<std::string>());
    }();

    fs::create_directories(args.out_dir);
    const fs::path ckpt = fs::path(args.out_dir) / "checkpoint.clab";
    const moco::PretrainResult result =
        moco::pretrain(data::UnlabeledDataset(ds), pcfg, ckpt, args.resume);
    if (args.verbose)
        for (std::size_t e = 0; e < result.epoch_losses.size(); ++e)
            std::cerr << "epoch " << e << " loss " << result.epoch_losses[e] << "\n";
    std::cout << "checkpoint: " << ckpt.string() << " (epochs " << result.epochs_done
              << ")\n";
}

struct EvaluateArgs {
    std::string checkpoint;
    std::string folder;
    std::string synthetic_spec;
    std::string protocol = "knn";
    std::string out_dir;
    Scalar fraction = 1.0;
    std::optional<std::uint64_t> seed;
};

void cmd_evaluate(const EvaluateArgs& args)
{
    require<ConfigError>(args.folder.empty() != args.synthetic_spec.empty(),
                         "--folder or --synthetic: give exactly one data source");
    require<ConfigError>(args.fraction > 0.0 && args.fraction <= 1.0,
                         "--fraction: must be in (0, 1]");
    const data::Dataset ds = args.folder.empty()
                                 ? data::generate_synthetic(cfg::synthetic_from_json(
                                       cfg::load_json_file(args.synthetic_spec), "spec"))
                                 : data::load_folder(args.folder);

    bench::ExperimentConfig ecfg; // defaults for knn/linear/finetune settings
    ecfg.seed = resolve_seed(args.seed, 1);
    const bench::Protocol protocol = bench::protocol_from_name(args.protocol);

    auto [encoder, encoder_cfg] = moco::load_encoder(args.checkpoint);
    Rng holdout_rng(derive_seed(ecfg.seed, "holdout"));
    const auto [train_pool, eval_idx] =
        bench::stratified_holdout(ds, ecfg.eval_holdout, holdout_rng);
    require<ConfigError>(!eval_idx.empty(), "dataset too small for an eval holdout");

    Rng subset_rng(bench::subset_seed(ecfg.seed, args.fraction, 0));
    const std::vector<Index> subset =
        bench::stratified_subsample(ds, train_pool, args.fraction, subset_rng);
    Rng split_rng(derive_seed(bench::subset_seed(ecfg.seed, args.fraction, 0), "val-split"));
    auto [train_idx, val_idx] = bench::split_train_val(ds, subset, 0.2, split_rng);
    if (val_idx.empty()) val_idx = train_idx;

    const Index num_classes = ds.num_classes();
    const std::vector<int> eval_labels = ds.labels(eval_idx);
    eval::Metrics metrics;
    switch (protocol) {
    case bench::Protocol::knn: {
        const eval::FeatureBank bank = eval::extract_features(encoder, encoder_cfg, ds, subset);
        const eval::FeatureBank queries =
            eval::extract_features(encoder, encoder_cfg, ds, eval_idx);
        const Index k = std::max<Index>(1, std::min(ecfg.knn.k, bank.size() / 2));
        metrics = eval::compute_metrics(
            eval::knn_predict(bank, queries.features, k, ecfg.knn.vote_temperature),
            eval_labels, num_classes);
        break;
    }
    case bench::Protocol::linear: {
        eval::ClassifierConfig ccfg = ecfg.linear;
        ccfg.seed = derive_seed(ecfg.seed, "linear");
        const eval::FeatureBank bank_train =
            eval::extract_features(encoder, encoder_cfg, ds, train_idx);
        const eval::FeatureBank bank_val =
            eval::extract_features(encoder, encoder_cfg, ds, val_idx);
        const eval::ProbeResult probe =
            eval::linear_probe(bank_train, bank_val, ccfg, num_classes);
        const eval::FeatureBank eval_bank =
            eval::extract_features(encoder, encoder_cfg, ds, eval_idx);
        metrics = eval::compute_metrics(probe.head.predict(eval_bank.features), eval_labels,
                                        num_classes);
        break;
    }
    case bench::Protocol::finetune: {
        eval::ClassifierConfig ccfg = ecfg.finetune;
        ccfg.seed = derive_seed(ecfg.seed, "finetune");
        const eval::FinetuneResult ft =
            eval::finetune(encoder, encoder_cfg, ds, train_idx, val_idx, ccfg,
                           ecfg.pretrain.augment, num_classes);
        const eval::FeatureBank eval_bank =
            eval::extract_features(ft.encoder, encoder_cfg, ds, eval_idx);
        metrics = eval::compute_metrics(ft.head.predict(eval_bank.features), eval_labels,
                                        num_classes);
        break;
    }
    }

    fs::create_directories(args.out_dir);
    json out;
    out["checkpoint"] = args.checkpoint;
    out["protocol"] = args.protocol;
    out["fraction"] = args.fraction;
    out["seed"] = ecfg.seed;
    out["top1_accuracy"] = metrics.top1_accuracy;
    out["macro_f1"] = metrics.macro_f1;
    cfg::write_json_file(out, fs::path(args.out_dir) / "metrics.json");
    std::cout << args.protocol << ": accuracy " << metrics.top1_accuracy << ", macro-F1 "
              << metrics.macro_f1 << "\n";
}

struct BenchmarkArgs {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<Index> jobs;
};

void cmd_benchmark(const BenchmarkArgs& args)
{
    bench::ExperimentConfig cfg =
        cfg::experiment_from_json(cfg::load_json_file(args.config_path));
    cfg.seed = resolve_seed(args.seed, cfg.seed);
    if (args.jobs) cfg.jobs = *args.jobs;
    const bench::MetricsReport report = bench::run_benchmark(cfg, args.out_dir);
    emit_report(args.out_dir);
    std::size_t cells = 0;
    for (const auto& g : report.groups) cells += g.records.size();
    std::cout << "benchmark complete: " << report.groups.size() << " groups, " << cells
              << " runs -> " << args.out_dir << "\n";
}

} // namespace

void emit_report(const fs::path& report_dir)
{
    const fs::path report_path = report_dir / "report.json";
    require<ConfigError>(fs::exists(report_path),
                         "no report.json under " + report_dir.string());
    const bench::MetricsReport report = bench::load_report_json(report_path);
    require<ConfigError>(!report.groups.empty(),
                         "report.json has no completed runs: " + report_path.string());
    bench::write_tables(report, report_dir / "tables");
    bench::write_charts(report, report_dir / "charts");
}

int run(int argc, const char* const* argv)
{
    CLI::App app{"contrastive pretraining and label-efficiency benchmarking"};
    app.require_subcommand(1);

    GenDataArgs gen;
    CLI::App* gen_cmd = app.add_subcommand("gen-data", "generate a synthetic dataset folder");
    gen_cmd->add_option("--spec", gen.spec_path, "synthetic spec JSON")
        ->required()
        ->check(CLI::ExistingFile);
    gen_cmd->add_option("--out", gen.out_dir, "output directory")->required();
    gen_cmd->add_option("--seed", gen.seed, "seed override");

    PretrainArgs pre;
    CLI::App* pre_cmd = app.add_subcommand("pretrain", "contrastive pretraining");
    pre_cmd->add_option("--config", pre.config_path, "pretrain config JSON")
        ->required()
        ->check(CLI::ExistingFile);
    pre_cmd->add_option("--out", pre.out_dir, "output directory")->required();
    pre_cmd->add_option("--seed", pre.seed, "seed override");
    pre_cmd->add_flag("--resume", pre.resume, "resume from an existing checkpoint");
    pre_cmd->add_flag("-v,--verbose", pre.verbose, "print per-epoch losses");

    EvaluateArgs ev;
    CLI::App* ev_cmd = app.add_subcommand("evaluate", "evaluate a checkpoint");
    ev_cmd->add_option("--checkpoint", ev.checkpoint, "checkpoint path")
        ->required()
        ->check(CLI::ExistingFile);
    ev_cmd->add_option("--folder", ev.folder, "dataset folder");
    ev_cmd->add_option("--synthetic", ev.synthetic_spec, "synthetic spec JSON");
    ev_cmd->add_option("--protocol", ev.protocol, "knn | linear | finetune");
    ev_cmd->add_option("--fraction", ev.fraction, "label fraction in (0, 1]");
    ev_cmd->add_option("--out", ev.out_dir, "output directory")->required();
    ev_cmd->add_option("--seed", ev.seed, "seed override");

    BenchmarkArgs bench_args;
    CLI::App* bench_cmd = app.add_subcommand("benchmark", "run the label-efficiency grid");
    bench_cmd->add_option("--config", bench_args.config_path, "experiment config JSON")
        ->required();
    bench_cmd->add_option("--out", bench_args.out_dir, "output directory")->required();
    bench_cmd->add_option("--seed", bench_args.seed, "seed override");
    bench_cmd->add_option("--jobs", bench_args.jobs, "parallel grid cells");

    std::string report_dir;
    CLI::App* report_cmd = app.add_subcommand("report", "emit tables and charts");
    report_cmd->add_option("--report", report_dir, "benchmark output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (*gen_cmd) cmd_gen_data(gen);
        if (*pre_cmd) cmd_pretrain(pre);
        if (*ev_cmd) cmd_evaluate(ev);
        if (*bench_cmd) {
            require<ConfigError>(fs::exists(bench_args.config_path),
                                 "config file not found: " + bench_args.config_path);
            cmd_benchmark(bench_args);
        }
        if (*report_cmd) emit_report(report_dir);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const ContractViolation& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const IngestError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

} // namespace clab::cli
