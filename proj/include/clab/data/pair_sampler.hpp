// SPDX-License-Identifier: Apache-2.0
#ifndef CLAB_DATA_PAIR_SAMPLER_HPP
#define CLAB_DATA_PAIR_SAMPLER_HPP

#include "clab/data/augment.hpp"
#include "clab/data/dataset.hpp"

namespace clab::data {

enum class PairMode { moco, mocotp };

struct PairSample {
    Vec query_view;
    Vec key_view;
    std::int64_t location_id = 0;
};

/// moco: both views are independent augmentations of the anchor image.
/// mocotp: the key view augments an image drawn uniformly from the other
/// timestamps at the anchor's location; a single-timestamp location falls
/// back to the anchor image (moco behaviour). The returned location id is
/// the anchor's.
PairSample sample_pair(const UnlabeledDataset& ds, Index anchor, PairMode mode,
                       const AugmentationPolicy& policy, Rng& rng);

} // namespace clab::data

#endif // CLAB_DATA_PAIR_SAMPLER_HPP
