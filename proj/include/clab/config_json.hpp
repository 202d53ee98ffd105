// SPDX-License-Identifier: Apache-2.0
#ifndef CLAB_CONFIG_JSON_HPP
#define CLAB_CONFIG_JSON_HPP

#include "clab/bench/experiment.hpp"

#include <json.hpp>

namespace clab::cfg {

// JSON <-> config structs with schema validation. Parsers reject unknown
// keys and report the offending field by its dotted path. Missing keys fall
// back to the struct defaults, so a minimal config stays minimal.

using json = nlohmann::ordered_json;

json to_json(const nn::EncoderConfig&);
json to_json(const nn::SgdConfig&);
json to_json(const data::AugmentationPolicy&);
json to_json(const data::SyntheticSpec&);
json to_json(const moco::ContrastiveConfig&);
json to_json(const moco::PretrainConfig&);
json to_json(const eval::ClassifierConfig&);
json to_json(const bench::KnnConfig&);
json to_json(const bench::ExperimentConfig&);

nn::EncoderConfig encoder_from_json(const json&, const std::string& at);
nn::SgdConfig sgd_from_json(const json&, const std::string& at);
data::AugmentationPolicy augment_from_json(const json&, const std::string& at);
data::SyntheticSpec synthetic_from_json(const json&, const std::string& at);
moco::ContrastiveConfig contrastive_from_json(const json&, const std::string& at);
moco::PretrainConfig pretrain_from_json(const json&, const std::string& at);
eval::ClassifierConfig classifier_from_json(const json&, const std::string& at,
                                            const eval::ClassifierConfig& defaults);
bench::KnnConfig knn_from_json(const json&, const std::string& at);
bench::ExperimentConfig experiment_from_json(const json&);

/// Parses a config file; IO failures and malformed JSON raise ConfigError
/// naming the path.
json load_json_file(const std::filesystem::path& path);
void write_json_file(const json& j, const std::filesystem::path& path);

} // namespace clab::cfg

#endif // CLAB_CONFIG_JSON_HPP
