// SPDX-License-Identifier: Apache-2.0
#include "clab/bench/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace clab::bench {

std::string variant_name(Variant v)
{
    switch (v) {
    case Variant::none: return "none";
    case Variant::supervised: return "supervised";
    case Variant::moco: return "moco";
    case Variant::mocotp: return "mocotp";
    }
    return "?";
}

std::string variant_display_name(Variant v)
{
    return v == Variant::none ? "random-init" : variant_name(v);
}

std::string protocol_name(Protocol p)
{
    switch (p) {
    case Protocol::knn: return "knn";
    case Protocol::linear: return "linear";
    case Protocol::finetune: return "finetune";
    }
    return "?";
}

Variant variant_from_name(const std::string& s)
{
    for (Variant v : {Variant::none, Variant::supervised, Variant::moco, Variant::mocotp})
        if (variant_name(v) == s) return v;
    throw ConfigError("unknown variant '" + s + "' (expected none|supervised|moco|mocotp)");
}

Protocol protocol_from_name(const std::string& s)
{
    for (Protocol p : {Protocol::knn, Protocol::linear, Protocol::finetune})
        if (protocol_name(p) == s) return p;
    throw ConfigError("unknown protocol '" + s + "' (expected knn|linear|finetune)");
}

void KnnConfig::validate() const
{
    require<ConfigError>(k >= 1, "knn.k must be >= 1");
    require<ConfigError>(vote_temperature > 0.0, "knn.vote_temperature must be positive");
}

ExperimentConfig::ExperimentConfig()
{
    dataset = data::SyntheticSpec{};
    linear.head_lr = 1.0;
    linear.plateau_patience = 5;
    finetune.head_lr = 1.0;
    finetune.backbone_lr = 3e-4;
    finetune.plateau_patience = 2;
}

void ExperimentConfig::validate() const
{
    require<ConfigError>(!variants.empty(), "variants must not be empty");
    require<ConfigError>(!fractions.empty(), "fractions must not be empty");
    require<ConfigError>(!protocols.empty(), "protocols must not be empty");
    for (Scalar f : fractions)
        require<ConfigError>(f > 0.0 && f <= 1.0, "fractions must be in (0, 1]");
    require<ConfigError>(repeats >= 1, "repeats must be >= 1");
    require<ConfigError>(eval_holdout > 0.0 && eval_holdout < 1.0,
                         "eval_holdout must be in (0, 1)");
    require<ConfigError>(supervised_epochs >= 0, "supervised_epochs must be >= 0");
    require<ConfigError>(jobs >= 1, "jobs must be >= 1");
    std::set<std::string> vset;
    for (Variant v : variants)
        require<ConfigError>(vset.insert(variant_name(v)).second,
                             "duplicate variant in config");
    if (const auto* spec = std::get_if<data::SyntheticSpec>(&dataset)) spec->validate();
    pretrain.validate();
    knn.validate();
    linear.validate();
    finetune.validate();
}

const GroupStats* MetricsReport::find(Variant v, Protocol p, Scalar fraction) const
{
    for (const GroupStats& g : groups)
        if (g.variant == v && g.protocol == p && g.fraction == fraction) return &g;
    return nullptr;
}

namespace {

int variant_order(Variant v)
{
    switch (v) {
    case Variant::none: return 0;
    case Variant::supervised: return 1;
    case Variant::moco: return 2;
    case Variant::mocotp: return 3;
    }
    return 4;
}

int protocol_order(Protocol p)
{
    switch (p) {
    case Protocol::knn: return 0;
    case Protocol::linear: return 1;
    case Protocol::finetune: return 2;
    }
    return 3;
}

} // namespace

MetricsReport aggregate(const std::vector<RunRecord>& records)
{
    std::set<std::tuple<int, int, std::uint64_t, Index>> keys;
    for (const RunRecord& r : records)
        require<ContractViolation>(
            keys.emplace(variant_order(r.variant), protocol_order(r.protocol),
                         double_bits(r.fraction), r.repeat)
                .second,
            "duplicate (variant, protocol, fraction, repeat) record");

    std::vector<RunRecord> sorted = records;
    std::sort(sorted.begin(), sorted.end(), [](const RunRecord& a, const RunRecord& b) {
        if (a.variant != b.variant) return variant_order(a.variant) < variant_order(b.variant);
        if (a.protocol != b.protocol)
            return protocol_order(a.protocol) < protocol_order(b.protocol);
        if (a.fraction != b.fraction) return a.fraction < b.fraction;
        return a.repeat < b.repeat;
    });

    MetricsReport report;
    for (const RunRecord& r : sorted) {
        if (r.status != "ok") continue;
        GroupStats* g = nullptr;
        if (!report.groups.empty()) {
            GroupStats& last = report.groups.back();
            if (last.variant == r.variant && last.protocol == r.protocol &&
                last.fraction == r.fraction)
                g = &last;
        }
        if (!g) {
            report.groups.push_back(GroupStats{r.variant, r.protocol, r.fraction});
            g = &report.groups.back();
        }
        g->records.push_back(r);
    }

    for (GroupStats& g : report.groups) {
        const Index n = static_cast<Index>(g.records.size());
        g.count = n;
        Scalar acc = 0.0, f1 = 0.0;
        for (const RunRecord& r : g.records) {
            acc += r.eval_metrics.top1_accuracy;
            f1 += r.eval_metrics.macro_f1;
        }
        g.accuracy_mean = acc / static_cast<Scalar>(n);
        g.f1_mean = f1 / static_cast<Scalar>(n);
        if (n > 1) {
            Scalar va = 0.0, vf = 0.0;
            for (const RunRecord& r : g.records) {
                va += std::pow(r.eval_metrics.top1_accuracy - g.accuracy_mean, 2);
                vf += std::pow(r.eval_metrics.macro_f1 - g.f1_mean, 2);
            }
            g.accuracy_sd = std::sqrt(va / static_cast<Scalar>(n - 1));
            g.f1_sd = std::sqrt(vf / static_cast<Scalar>(n - 1));
        }
    }
    return report;
}

} // namespace clab::bench
