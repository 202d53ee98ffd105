// SPDX-License-Identifier: Apache-2.0
#include "clab/data/pair_sampler.hpp"

namespace clab::data {

PairSample sample_pair(const UnlabeledDataset& ds, Index anchor, PairMode mode,
                       const AugmentationPolicy& policy, Rng& rng)
{
    require<ContractViolation>(anchor >= 0 && anchor < ds.size(),
                               "anchor index outside dataset");
    const std::int64_t location = ds.location_id(anchor);

    Index key_source = anchor;
    if (mode == PairMode::mocotp) {
        const auto& peers = ds.location_samples(location);
        if (peers.size() > 1) {
            // Uniform over the location's other views.
            const std::size_t draw = rng.uniform_index(peers.size() - 1);
            std::size_t j = 0;
            for (Index idx : peers) {
                if (idx == anchor) continue;
                if (j == draw) {
                    key_source = idx;
                    break;
                }
                ++j;
            }
        }
    }

    PairSample out;
    const Index h = ds.height(), w = ds.width(), c = ds.channels();
    out.query_view = augment(ds.image(anchor), h, w, c, policy, rng);
    out.key_view = augment(ds.image(key_source), h, w, c, policy, rng);
    out.location_id = location;
    return out;
}

} // namespace clab::data
