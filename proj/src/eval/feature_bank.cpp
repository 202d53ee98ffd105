// SPDX-License-Identifier: Apache-2.0
#include "clab/eval/feature_bank.hpp"

#include "clab/nn/checkpoint.hpp"

#include <fstream>

namespace clab::eval {

void FeatureBank::validate() const
{
    require<ContractViolation>(features.rows() == static_cast<Index>(labels.size()),
                               "feature bank rows must match label count");
    if (normalized)
        for (Index r = 0; r < features.rows(); ++r) {
            const Scalar n = features.row(r).norm();
            require<ContractViolation>(n == 0.0 || std::abs(n - 1.0) <= 1e-9,
                                       "normalized bank has a non-unit row");
        }
}

FeatureBank extract_features(const nn::ParamSet& encoder, const nn::EncoderConfig& cfg,
                             const data::Dataset& ds, std::span<const Index> indices,
                             Index batch_size)
{
    require<ContractViolation>(ds.height() == cfg.height && ds.width() == cfg.width &&
                                   ds.channels() == cfg.channels,
                               "dataset image size does not match the encoder input");
    require<ConfigError>(batch_size >= 1, "batch_size must be >= 1");
    FeatureBank bank;
    bank.features.resize(static_cast<Index>(indices.size()), cfg.feature_dim);
    bank.labels = ds.labels(indices);
    for (std::size_t start = 0; start < indices.size();
         start += static_cast<std::size_t>(batch_size)) {
        const std::size_t count =
            std::min(static_cast<std::size_t>(batch_size), indices.size() - start);
        const Mat batch = ds.gather(indices.subspan(start, count));
        bank.features.middleRows(static_cast<Index>(start), static_cast<Index>(count)) =
            nn::encoder_features(encoder, cfg, batch, nn::ForwardMode::backbone);
    }
    return bank;
}

FeatureBank extract_features(const nn::ParamSet& encoder, const nn::EncoderConfig& cfg,
                             const data::Dataset& ds, Index batch_size)
{
    std::vector<Index> all(static_cast<std::size_t>(ds.size()));
    for (Index i = 0; i < ds.size(); ++i) all[static_cast<std::size_t>(i)] = i;
    return extract_features(encoder, cfg, ds, all, batch_size);
}

FeatureBank normalized_rows(const FeatureBank& bank)
{
    FeatureBank out = bank;
    for (Index r = 0; r < out.features.rows(); ++r) {
        const Scalar n = out.features.row(r).norm();
        if (n > 0.0) out.features.row(r) /= n;
    }
    out.normalized = true;
    return out;
}

void write_bank_csv(const FeatureBank& bank, const std::filesystem::path& path)
{
    bank.validate();
    std::ofstream os(path, std::ios::trunc);
    require<IngestError>(os.good(), "cannot open for writing: " + path.string());
    os << "label";
    for (Index j = 0; j < bank.dim(); ++j) os << ",f" << j;
    os << '\n';
    os.precision(17);
    for (Index r = 0; r < bank.size(); ++r) {
        os << bank.labels[static_cast<std::size_t>(r)];
        for (Index j = 0; j < bank.dim(); ++j) os << ',' << bank.features(r, j);
        os << '\n';
    }
    require<IngestError>(os.good(), "failed writing " + path.string());
}

void write_bank_binary(const FeatureBank& bank, const std::filesystem::path& path)
{
    bank.validate();
    nn::NamedTensors tensors;
    tensors.emplace_back("features", nn::Tensor::from_matrix(bank.features));
    nn::Tensor labels({std::max<Index>(1, bank.size())});
    for (Index i = 0; i < bank.size(); ++i)
        labels.data[i] = static_cast<Scalar>(bank.labels[static_cast<std::size_t>(i)]);
    tensors.emplace_back("labels", std::move(labels));
    nn::save_tensor_file(path, tensors);
}

FeatureBank load_bank_binary(const std::filesystem::path& path)
{
    FeatureBank bank;
    for (auto& [name, tensor] : nn::load_tensor_file(path)) {
        if (name == "features") {
            bank.features = tensor.matrix();
        } else if (name == "labels") {
            bank.labels.resize(static_cast<std::size_t>(tensor.numel()));
            for (Index i = 0; i < tensor.numel(); ++i)
                bank.labels[static_cast<std::size_t>(i)] = static_cast<int>(tensor.data[i]);
        }
    }
    bank.labels.resize(static_cast<std::size_t>(bank.features.rows()));
    bank.validate();
    return bank;
}

} // namespace clab::eval
