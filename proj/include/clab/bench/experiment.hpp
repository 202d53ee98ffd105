// SPDX-License-Identifier: Apache-2.0
#ifndef CLAB_BENCH_EXPERIMENT_HPP
#define CLAB_BENCH_EXPERIMENT_HPP

#include "clab/contrastive/moco.hpp"
#include "clab/data/synthetic.hpp"
#include "clab/eval/classifier.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace clab::bench {

enum class Variant { none, supervised, moco, mocotp };
enum class Protocol { knn, linear, finetune };

std::string variant_name(Variant v);         // config token ("none", "moco", ...)
std::string variant_display_name(Variant v); // table row label ("random-init", ...)
std::string protocol_name(Protocol p);
Variant variant_from_name(const std::string&);
Protocol protocol_from_name(const std::string&);

struct KnnConfig {
    Index k = 200; // clamped to half the bank size at run time, floor 1
    Scalar vote_temperature = 0.07;
    void validate() const;
};

/// Complete declarative description of one benchmark run.
struct ExperimentConfig {
    std::uint64_t seed = 1;
    std::variant<data::SyntheticSpec, std::filesystem::path> dataset;
    Scalar eval_holdout = 0.2; // location-stratified held-out split for metrics
    std::vector<Variant> variants = {Variant::none, Variant::moco, Variant::mocotp};
    std::vector<Scalar> fractions = {0.01, 0.10, 1.00};
    Index repeats = 3;
    std::vector<Protocol> protocols = {Protocol::knn, Protocol::linear, Protocol::finetune};
    moco::PretrainConfig pretrain;
    Index supervised_epochs = 30;
    KnnConfig knn;
    eval::ClassifierConfig linear;   // head_lr 1, plateau patience 5
    eval::ClassifierConfig finetune; // backbone_lr 3e-4, head_lr 1, plateau patience 2
    Index jobs = 1;

    ExperimentConfig();
    void validate() const;
};

struct RunRecord {
    Variant variant = Variant::none;
    Protocol protocol = Protocol::knn;
    Scalar fraction = 1.0;
    Index repeat = 0;
    std::uint64_t seed = 0;
    eval::Metrics eval_metrics;      // held-out evaluation split
    eval::Metrics selection_metrics; // model-selection validation (probe/finetune)
    Index best_epoch = -1;
    Scalar wall_seconds = 0.0;
    std::string status = "ok";
    std::string error;
};

struct GroupStats {
    Variant variant = Variant::none;
    Protocol protocol = Protocol::knn;
    Scalar fraction = 1.0;
    Index count = 0;
    Scalar accuracy_mean = 0.0;
    Scalar f1_mean = 0.0;
    std::optional<Scalar> accuracy_sd; // sample sd, only when count > 1
    std::optional<Scalar> f1_sd;
    std::vector<RunRecord> records;
};

struct MetricsReport {
    std::uint64_t master_seed = 0;
    std::vector<GroupStats> groups;

    const GroupStats* find(Variant v, Protocol p, Scalar fraction) const;
};

/// Groups by (variant, protocol, fraction), sorted deterministically, with
/// mean and sample standard deviation (divisor R-1) per metric. Duplicate
/// (variant, protocol, fraction, repeat) keys are a contract violation.
MetricsReport aggregate(const std::vector<RunRecord>& records);

} // namespace clab::bench

#endif // CLAB_BENCH_EXPERIMENT_HPP
