// SPDX-License-Identifier: Apache-2.0
#ifndef CLAB_EVAL_FEATURE_BANK_HPP
#define CLAB_EVAL_FEATURE_BANK_HPP

#include "clab/data/dataset.hpp"
#include "clab/nn/encoder.hpp"

#include <filesystem>

namespace clab::eval {

/// N x d_feat backbone features with aligned labels.
struct FeatureBank {
    Mat features;
    std::vector<int> labels;
    bool normalized = false;

    Index size() const { return features.rows(); }
    Index dim() const { return features.cols(); }
    void validate() const;
};

/// Backbone (pre-projection) features in dataset order, no augmentation.
/// The encoder is not mutated.
FeatureBank extract_features(const nn::ParamSet& encoder, const nn::EncoderConfig& cfg,
                             const data::Dataset& ds, Index batch_size = 256);

/// Subset variant; row i corresponds to indices[i].
FeatureBank extract_features(const nn::ParamSet& encoder, const nn::EncoderConfig& cfg,
                             const data::Dataset& ds, std::span<const Index> indices,
                             Index batch_size = 256);

/// Rows scaled to unit norm; zero rows stay zero (their similarity reads 0).
FeatureBank normalized_rows(const FeatureBank& bank);

/// CSV export: label followed by the d_feat feature columns.
void write_bank_csv(const FeatureBank& bank, const std::filesystem::path& path);

/// Binary export in the tensor container format ("features", "labels").
void write_bank_binary(const FeatureBank& bank, const std::filesystem::path& path);
FeatureBank load_bank_binary(const std::filesystem::path& path);

} // namespace clab::eval

#endif // CLAB_EVAL_FEATURE_BANK_HPP
