// SPDX-License-Identifier: Apache-2.0
#include "clab/config_json.hpp"

#include <fstream>
#include <set>

namespace clab::cfg {

namespace {

void check_keys(const json& j, const std::string& at, std::set<std::string> allowed)
{
    require<ConfigError>(j.is_object(), at + ": expected a JSON object");
    for (const auto& [key, value] : j.items())
        require<ConfigError>(allowed.count(key) == 1, at + "." + key + ": unknown field");
}

template <class T>
T get_or(const json& j, const std::string& at, const char* key, T fallback)
{
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(at + "." + key + ": wrong type");
    }
}

std::vector<Index> get_index_list(const json& j, const std::string& at, const char* key,
                                  std::vector<Index> fallback)
{
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<std::vector<Index>>();
    } catch (const json::exception&) {
        throw ConfigError(at + "." + key + ": expected an array of integers");
    }
}

} // namespace

json load_json_file(const std::filesystem::path& path)
{
    std::ifstream is(path);
    require<ConfigError>(is.good(), "cannot open config file: " + path.string());
    try {
        return json::parse(is);
    } catch (const json::exception& e) {
        throw ConfigError("malformed JSON in " + path.string() + ": " + e.what());
    }
}

void write_json_file(const json& j, const std::filesystem::path& path)
{
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::trunc);
    require<IngestError>(os.good(), "cannot open for writing: " + path.string());
    os << j.dump(2) << '\n';
    require<IngestError>(os.good(), "failed writing " + path.string());
}

//==============================================================================
// Encoder
//==============================================================================

json to_json(const nn::EncoderConfig& c)
{
    json j;
    j["height"] = c.height;
    j["width"] = c.width;
    j["channels"] = c.channels;
    j["hidden_widths"] = c.hidden_widths;
    j["feature_dim"] = c.feature_dim;
    j["projection_widths"] = c.projection_widths;
    j["conv_stem"] = c.conv_stem;
    j["stem_channels"] = c.stem_channels;
    return j;
}

nn::EncoderConfig encoder_from_json(const json& j, const std::string& at)
{
    check_keys(j, at,
               {"height", "width", "channels", "hidden_widths", "feature_dim",
                "projection_widths", "conv_stem", "stem_channels"});
    nn::EncoderConfig c;
    c.height = get_or<Index>(j, at, "height", c.height);
    c.width = get_or<Index>(j, at, "width", c.width);
    c.channels = get_or<Index>(j, at, "channels", c.channels);
    c.hidden_widths = get_index_list(j, at, "hidden_widths", c.hidden_widths);
    c.feature_dim = get_or<Index>(j, at, "feature_dim", c.feature_dim);
    c.projection_widths = get_index_list(j, at, "projection_widths", c.projection_widths);
    c.conv_stem = get_or<bool>(j, at, "conv_stem", c.conv_stem);
    c.stem_channels = get_or<Index>(j, at, "stem_channels", c.stem_channels);
    try {
        c.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(at + ": " + e.what());
    }
    return c;
}

//==============================================================================
// Optimizer / augmentation / synthetic data
//==============================================================================

json to_json(const nn::SgdConfig& c)
{
    return json{{"momentum", c.momentum}, {"weight_decay", c.weight_decay}};
}

nn::SgdConfig sgd_from_json(const json& j, const std::string& at)
{
    check_keys(j, at, {"momentum", "weight_decay"});
    nn::SgdConfig c;
    c.momentum = get_or<Scalar>(j, at, "momentum", c.momentum);
    c.weight_decay = get_or<Scalar>(j, at, "weight_decay", c.weight_decay);
    require<ConfigError>(c.momentum >= 0.0 && c.momentum < 1.0,
                         at + ".momentum: must be in [0, 1)");
    require<ConfigError>(c.weight_decay >= 0.0, at + ".weight_decay: must be non-negative");
    return c;
}

json to_json(const data::AugmentationPolicy& c)
{
    json j;
    j["crop_scale_min"] = c.crop_scale_min;
    j["crop_scale_max"] = c.crop_scale_max;
    j["hflip_prob"] = c.hflip_prob;
    j["rotate90"] = c.rotate90;
    j["brightness"] = c.brightness;
    j["contrast"] = c.contrast;
    j["saturation"] = c.saturation;
    j["blur_prob"] = c.blur_prob;
    j["blur_sigma_min"] = c.blur_sigma_min;
    j["blur_sigma_max"] = c.blur_sigma_max;
    j["out_height"] = c.out_height;
    j["out_width"] = c.out_width;
    return j;
}

data::AugmentationPolicy augment_from_json(const json& j, const std::string& at)
{
    check_keys(j, at,
               {"crop_scale_min", "crop_scale_max", "hflip_prob", "rotate90", "brightness",
                "contrast", "saturation", "blur_prob", "blur_sigma_min", "blur_sigma_max",
                "out_height", "out_width"});
    data::AugmentationPolicy c;
    c.crop_scale_min = get_or<Scalar>(j, at, "crop_scale_min", c.crop_scale_min);
    c.crop_scale_max = get_or<Scalar>(j, at, "crop_scale_max", c.crop_scale_max);
    c.hflip_prob = get_or<Scalar>(j, at, "hflip_prob", c.hflip_prob);
    c.rotate90 = get_or<bool>(j, at, "rotate90", c.rotate90);
    c.brightness = get_or<Scalar>(j, at, "brightness", c.brightness);
    c.contrast = get_or<Scalar>(j, at, "contrast", c.contrast);
    c.saturation = get_or<Scalar>(j, at, "saturation", c.saturation);
    c.blur_prob = get_or<Scalar>(j, at, "blur_prob", c.blur_prob);
    c.blur_sigma_min = get_or<Scalar>(j, at, "blur_sigma_min", c.blur_sigma_min);
    c.blur_sigma_max = get_or<Scalar>(j, at, "blur_sigma_max", c.blur_sigma_max);
    c.out_height = get_or<Index>(j, at, "out_height", c.out_height);
    c.out_width = get_or<Index>(j, at, "out_width", c.out_width);
    try {
        c.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(at + ": " + e.what());
    }
    return c;
}

json to_json(const data::SyntheticSpec& c)
{
    json j;
    j["num_classes"] = c.num_classes;
    j["locations_per_class"] = c.locations_per_class;
    j["views_per_location"] = c.views_per_location;
    j["image_size"] = c.image_size;
    j["channels"] = c.channels;
    j["texture_cells"] = c.texture_cells;
    j["class_contrast"] = c.class_contrast;
    j["location_amplitude"] = c.location_amplitude;
    j["temporal_amplitude"] = c.temporal_amplitude;
    j["pixel_noise"] = c.pixel_noise;
    j["seed"] = c.seed;
    return j;
}

data::SyntheticSpec synthetic_from_json(const json& j, const std::string& at)
{
    check_keys(j, at,
               {"num_classes", "locations_per_class", "views_per_location", "image_size",
                "channels", "texture_cells", "class_contrast", "location_amplitude",
                "temporal_amplitude", "pixel_noise", "seed"});
    data::SyntheticSpec c;
    c.num_classes = get_or<Index>(j, at, "num_classes", c.num_classes);
    c.locations_per_class = get_or<Index>(j, at, "locations_per_class", c.locations_per_class);
    c.views_per_location = get_or<Index>(j, at, "views_per_location", c.views_per_location);
    c.image_size = get_or<Index>(j, at, "image_size", c.image_size);
    c.channels = get_or<Index>(j, at, "channels", c.channels);
    c.texture_cells = get_or<Index>(j, at, "texture_cells", c.texture_cells);
    c.class_contrast = get_or<Scalar>(j, at, "class_contrast", c.class_contrast);
    c.location_amplitude = get_or<Scalar>(j, at, "location_amplitude", c.location_amplitude);
    c.temporal_amplitude = get_or<Scalar>(j, at, "temporal_amplitude", c.temporal_amplitude);
    c.pixel_noise = get_or<Scalar>(j, at, "pixel_noise", c.pixel_noise);
    c.seed = get_or<std::uint64_t>(j, at, "seed", c.seed);
    try {
        c.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(at + ": " + e.what());
    }
    return c;
}

//==============================================================================
// Contrastive / pretraining
//==============================================================================

json to_json(const moco::ContrastiveConfig& c)
{
    json j;
    j["temperature"] = c.temperature;
    j["queue_capacity"] = c.queue_capacity;
    j["ema"] = c.ema;
    j["mode"] = c.mode == data::PairMode::mocotp ? "mocotp" : "moco";
    j["mask_false_negatives"] = c.mask_false_negatives;
    return j;
}

moco::ContrastiveConfig contrastive_from_json(const json& j, const std::string& at)
{
    check_keys(j, at, {"temperature", "queue_capacity", "ema", "mode",
                       "mask_false_negatives"});
    moco::ContrastiveConfig c;
    c.temperature = get_or<Scalar>(j, at, "temperature", c.temperature);
    c.queue_capacity = get_or<Index>(j, at, "queue_capacity", c.queue_capacity);
    c.ema = get_or<Scalar>(j, at, "ema", c.ema);
    const std::string mode = get_or<std::string>(j, at, "mode", "moco");
    if (mode == "moco")
        c.mode = data::PairMode::moco;
    else if (mode == "mocotp")
        c.mode = data::PairMode::mocotp;
    else
        throw ConfigError(at + ".mode: expected 'moco' or 'mocotp'");
    c.mask_false_negatives = get_or<bool>(j, at, "mask_false_negatives",
                                          c.mask_false_negatives);
    try {
        c.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(at + ": " + e.what());
    }
    return c;
}

json to_json(const moco::PretrainConfig& c)
{
    json j;
    j["encoder"] = to_json(c.encoder);
    j["contrastive"] = to_json(c.contrastive);
    j["optimizer"] = to_json(c.optimizer);
    j["augment"] = to_json(c.augment);
    j["base_lr"] = c.base_lr;
    j["epochs"] = c.epochs;
    j["batch_size"] = c.batch_size;
    j["seed"] = c.seed;
    return j;
}

moco::PretrainConfig pretrain_from_json(const json& j, const std::string& at)
{
    check_keys(j, at, {"encoder", "contrastive", "optimizer", "augment", "base_lr", "epochs",
                       "batch_size", "seed"});
    moco::PretrainConfig c;
    if (j.contains("encoder")) c.encoder = encoder_from_json(j.at("encoder"), at + ".encoder");
    if (j.contains("contrastive"))
        c.contrastive = contrastive_from_json(j.at("contrastive"), at + ".contrastive");
    if (j.contains("optimizer"))
        c.optimizer = sgd_from_json(j.at("optimizer"), at + ".optimizer");
    if (j.contains("augment")) {
        c.augment = augment_from_json(j.at("augment"), at + ".augment");
    } else {
        c.augment.out_height = c.encoder.height;
        c.augment.out_width = c.encoder.width;
    }
    c.base_lr = get_or<Scalar>(j, at, "base_lr", c.base_lr);
    c.epochs = get_or<Index>(j, at, "epochs", c.epochs);
    c.batch_size = get_or<Index>(j, at, "batch_size", c.batch_size);
    c.seed = get_or<std::uint64_t>(j, at, "seed", c.seed);
    try {
        c.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(at + ": " + e.what());
    }
    return c;
}

//==============================================================================
// Evaluation / experiment
//==============================================================================

json to_json(const eval::ClassifierConfig& c)
{
    json j;
    j["head_lr"] = c.head_lr;
    j["backbone_lr"] = c.backbone_lr;
    j["momentum"] = c.momentum;
    j["weight_decay"] = c.weight_decay;
    j["batch_size"] = c.batch_size;
    j["max_epochs"] = c.max_epochs;
    j["plateau_patience"] = c.plateau_patience;
    j["plateau_factor"] = c.plateau_factor;
    j["plateau_min_delta"] = c.plateau_min_delta;
    j["early_stop_patience"] = c.early_stop_patience;
    return j;
}

eval::ClassifierConfig classifier_from_json(const json& j, const std::string& at,
                                            const eval::ClassifierConfig& defaults)
{
    check_keys(j, at,
               {"head_lr", "backbone_lr", "momentum", "weight_decay", "batch_size",
                "max_epochs", "plateau_patience", "plateau_factor", "plateau_min_delta",
                "early_stop_patience"});
    eval::ClassifierConfig c = defaults;
    c.head_lr = get_or<Scalar>(j, at, "head_lr", c.head_lr);
    c.backbone_lr = get_or<Scalar>(j, at, "backbone_lr", c.backbone_lr);
    c.momentum = get_or<Scalar>(j, at, "momentum", c.momentum);
    c.weight_decay = get_or<Scalar>(j, at, "weight_decay", c.weight_decay);
    c.batch_size = get_or<Index>(j, at, "batch_size", c.batch_size);
    c.max_epochs = get_or<Index>(j, at, "max_epochs", c.max_epochs);
    c.plateau_patience = get_or<Index>(j, at, "plateau_patience", c.plateau_patience);
    c.plateau_factor = get_or<Scalar>(j, at, "plateau_factor", c.plateau_factor);
    c.plateau_min_delta = get_or<Scalar>(j, at, "plateau_min_delta", c.plateau_min_delta);
    c.early_stop_patience = get_or<Index>(j, at, "early_stop_patience", c.early_stop_patience);
    try {
        c.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(at + ": " + e.what());
    }
    return c;
}

json to_json(const bench::KnnConfig& c)
{
    return json{{"k", c.k}, {"vote_temperature", c.vote_temperature}};
}

bench::KnnConfig knn_from_json(const json& j, const std::string& at)
{
    check_keys(j, at, {"k", "vote_temperature"});
    bench::KnnConfig c;
    c.k = get_or<Index>(j, at, "k", c.k);
    c.vote_temperature = get_or<Scalar>(j, at, "vote_temperature", c.vote_temperature);
    try {
        c.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(at + ": " + e.what());
    }
    return c;
}

json to_json(const bench::ExperimentConfig& c)
{
    json j;
    j["schema_version"] = 1;
    j["seed"] = c.seed;
    if (const auto* spec = std::get_if<data::SyntheticSpec>(&c.dataset))
        j["dataset"]["synthetic"] = to_json(*spec);
    else
        j["dataset"]["folder"] = std::get<std::filesystem::path>(c.dataset).string();
    j["eval_holdout"] = c.eval_holdout;
    json variants = json::array();
    for (bench::Variant v : c.variants) variants.push_back(bench::variant_name(v));
    j["variants"] = variants;
    j["fractions"] = c.fractions;
    j["repeats"] = c.repeats;
    json protocols = json::array();
    for (bench::Protocol p : c.protocols) protocols.push_back(bench::protocol_name(p));
    j["protocols"] = protocols;
    j["pretrain"] = to_json(c.pretrain);
    j["supervised_epochs"] = c.supervised_epochs;
    j["knn"] = to_json(c.knn);
    j["linear"] = to_json(c.linear);
    j["finetune"] = to_json(c.finetune);
    j["jobs"] = c.jobs;
    return j;
}

bench::ExperimentConfig experiment_from_json(const json& j)
{
    const std::string at = "config";
    check_keys(j, at,
               {"schema_version", "seed", "dataset", "eval_holdout", "variants", "fractions",
                "repeats", "protocols", "pretrain", "supervised_epochs", "knn", "linear",
                "finetune", "jobs"});
    const auto version = get_or<int>(j, at, "schema_version", 1);
    require<ConfigError>(version == 1, at + ".schema_version: unsupported version");

    bench::ExperimentConfig c;
    c.seed = get_or<std::uint64_t>(j, at, "seed", c.seed);
    if (j.contains("dataset")) {
        const json& d = j.at("dataset");
        check_keys(d, at + ".dataset", {"synthetic", "folder"});
        require<ConfigError>(d.size() == 1,
                             at + ".dataset: give exactly one of 'synthetic' or 'folder'");
        if (d.contains("synthetic"))
            c.dataset = synthetic_from_json(d.at("synthetic"), at + ".dataset.synthetic");
        else
            c.dataset = std::filesystem::path(d.at("folder").get<std::string>());
    }
    c.eval_holdout = get_or<Scalar>(j, at, "eval_holdout", c.eval_holdout);
    if (j.contains("variants")) {
        c.variants.clear();
        for (const json& v : j.at("variants"))
            c.variants.push_back(bench::variant_from_name(v.get<std::string>()));
    }
    if (j.contains("fractions"))
        c.fractions = j.at("fractions").get<std::vector<Scalar>>();
    c.repeats = get_or<Index>(j, at, "repeats", c.repeats);
    if (j.contains("protocols")) {
        c.protocols.clear();
        for (const json& p : j.at("protocols"))
            c.protocols.push_back(bench::protocol_from_name(p.get<std::string>()));
    }
    if (j.contains("pretrain"))
        c.pretrain = pretrain_from_json(j.at("pretrain"), at + ".pretrain");
    c.supervised_epochs = get_or<Index>(j, at, "supervised_epochs", c.supervised_epochs);
    if (j.contains("knn")) c.knn = knn_from_json(j.at("knn"), at + ".knn");
    if (j.contains("linear"))
        c.linear = classifier_from_json(j.at("linear"), at + ".linear", c.linear);
    if (j.contains("finetune"))
        c.finetune = classifier_from_json(j.at("finetune"), at + ".finetune", c.finetune);
    c.jobs = get_or<Index>(j, at, "jobs", c.jobs);
    try {
        c.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(at + ": " + e.what());
    }
    return c;
}

} // namespace clab::cfg
