// SPDX-License-Identifier: Apache-2.0
#include "clab/data/dataset.hpp"

#include <algorithm>

namespace clab::data {

void Dataset::add(Sample s)
{
    require<IngestError>(s.image.size() == pixels(),
                         "sample image size does not match dataset H*W*C");
    require<IngestError>(s.label >= 0, "labels must be non-negative class indices");
    auto it = location_label_.find(s.location_id);
    if (it == location_label_.end()) {
        location_label_[s.location_id] = s.label;
        location_order_.push_back(s.location_id);
    } else {
        require<IngestError>(it->second == s.label,
                             "samples at one location must share one label");
    }
    num_classes_ = std::max<Index>(num_classes_, s.label + 1);
    by_location_[s.location_id].push_back(size());
    samples_.push_back(std::move(s));
}

const std::vector<Index>& Dataset::location_samples(std::int64_t location) const
{
    auto it = by_location_.find(location);
    require<UsageError>(it != by_location_.end(), "unknown location id");
    return it->second;
}

int Dataset::location_label(std::int64_t location) const
{
    auto it = location_label_.find(location);
    require<UsageError>(it != location_label_.end(), "unknown location id");
    return it->second;
}

Mat Dataset::gather(std::span<const Index> indices) const
{
    Mat out(static_cast<Index>(indices.size()), pixels());
    for (std::size_t i = 0; i < indices.size(); ++i)
        out.row(static_cast<Index>(i)) = samples_[static_cast<std::size_t>(indices[i])]
                                             .image.transpose();
    return out;
}

std::vector<int> Dataset::labels(std::span<const Index> indices) const
{
    std::vector<int> out(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i)
        out[i] = samples_[static_cast<std::size_t>(indices[i])].label;
    return out;
}

std::vector<int> Dataset::all_labels() const
{
    std::vector<int> out(samples_.size());
    for (std::size_t i = 0; i < samples_.size(); ++i) out[i] = samples_[i].label;
    return out;
}

void Dataset::set_location_name(std::int64_t location, std::string name)
{
    location_names_[location] = std::move(name);
}

std::string Dataset::location_name(std::int64_t location) const
{
    auto it = location_names_.find(location);
    if (it != location_names_.end()) return it->second;
    return "loc" + std::to_string(location);
}

} // namespace clab::data
