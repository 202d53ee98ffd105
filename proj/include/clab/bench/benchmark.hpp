// SPDX-License-Identifier: Apache-2.0
#ifndef CLAB_BENCH_BENCHMARK_HPP
#define CLAB_BENCH_BENCHMARK_HPP

#include "clab/bench/experiment.hpp"

#include <filesystem>

namespace clab::bench {

struct SupervisedPretrainConfig {
    nn::EncoderConfig encoder;
    nn::SgdConfig optimizer;
    data::AugmentationPolicy augment;
    Scalar base_lr = 3e-2; // cosine over all steps
    Index epochs = 30;
    Index batch_size = 64;
    std::uint64_t seed = 1;
};

/// Encoder plus classification head trained with cross-entropy on all labels
/// of the given rows; the checkpoint stores the backbone for transfer (the
/// head rides along but is ignored downstream).
void supervised_pretrain(const data::Dataset& ds, std::span<const Index> indices,
                         const SupervisedPretrainConfig& cfg,
                         const std::filesystem::path& checkpoint_path);

/// Runs the full grid: one pretraining per variant, then per
/// (fraction x repeat x protocol) an independent stratified subset and one
/// RunRecord. Completed records on disk are skipped, so reruns resume.
/// Failures are recorded per cell without aborting siblings. Identical
/// master seeds reproduce the report bit-exactly.
///
/// Output directory layout:
///   config.json  checkpoints/<variant>.clab(.json)  records/<cell>.json
///   report.json  tables/<protocol>.csv
MetricsReport run_benchmark(const ExperimentConfig& cfg,
                            const std::filesystem::path& out_dir);

/// Loads or generates the configured dataset.
data::Dataset open_dataset(const ExperimentConfig& cfg);

std::string record_filename(Variant v, Protocol p, Scalar fraction, Index repeat);

} // namespace clab::bench

#endif // CLAB_BENCH_BENCHMARK_HPP
