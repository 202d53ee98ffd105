// SPDX-License-Identifier: Apache-2.0
#ifndef CLAB_DATA_DATASET_HPP
#define CLAB_DATA_DATASET_HPP

#include "clab/common.hpp"
#include "clab/errors.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace clab::data {

/// One image patch with its class label, the location it was captured at and
/// an integer time index. Images are flat row-major (y * W + x) * C + c,
/// values in [0, 1].
struct Sample {
    Vec image;
    int label = 0;
    std::int64_t location_id = 0;
    std::int64_t timestamp = 0;
};

/// Immutable-after-construction sample store. All samples share H x W x C.
/// Samples at one location must share one label; temporal views of a location
/// are its samples ordered by timestamp.
class Dataset {
public:
    Dataset(Index height, Index width, Index channels)
        : height_(height), width_(width), channels_(channels)
    {
        require<ConfigError>(height > 0 && width > 0 && channels > 0,
                             "image dimensions must be positive");
    }

    void add(Sample s);

    Index size() const { return static_cast<Index>(samples_.size()); }
    Index height() const { return height_; }
    Index width() const { return width_; }
    Index channels() const { return channels_; }
    Index pixels() const { return height_ * width_ * channels_; }

    const Sample& operator[](Index i) const { return samples_[static_cast<std::size_t>(i)]; }

    /// Highest label + 1.
    Index num_classes() const { return num_classes_; }

    /// Distinct location ids in first-seen order.
    const std::vector<std::int64_t>& locations() const { return location_order_; }

    /// Sample indices at a location, in insertion order (callers insert
    /// timestamp-ordered; the synthetic generator and folder loader do).
    const std::vector<Index>& location_samples(std::int64_t location) const;

    int location_label(std::int64_t location) const;

    /// Gathers rows into a batch matrix.
    Mat gather(std::span<const Index> indices) const;

    std::vector<int> labels(std::span<const Index> indices) const;
    std::vector<int> all_labels() const;

    /// Optional human-readable location names (used by folder export/import).
    void set_location_name(std::int64_t location, std::string name);
    std::string location_name(std::int64_t location) const;

private:
    Index height_, width_, channels_;
    Index num_classes_ = 0;
    std::vector<Sample> samples_;
    std::vector<std::int64_t> location_order_;
    std::unordered_map<std::int64_t, std::vector<Index>> by_location_;
    std::unordered_map<std::int64_t, int> location_label_;
    std::unordered_map<std::int64_t, std::string> location_names_;
};

/// Label-free view handed to pretraining so SSL code cannot read labels.
class UnlabeledDataset {
public:
    explicit UnlabeledDataset(const Dataset& ds) : ds_(&ds) {}

    Index size() const { return ds_->size(); }
    Index height() const { return ds_->height(); }
    Index width() const { return ds_->width(); }
    Index channels() const { return ds_->channels(); }

    const Vec& image(Index i) const { return (*ds_)[i].image; }
    std::int64_t location_id(Index i) const { return (*ds_)[i].location_id; }
    std::int64_t timestamp(Index i) const { return (*ds_)[i].timestamp; }
    const std::vector<Index>& location_samples(std::int64_t loc) const
    {
        return ds_->location_samples(loc);
    }

private:
    const Dataset* ds_;
};

} // namespace clab::data

#endif // CLAB_DATA_DATASET_HPP
