// SPDX-License-Identifier: Apache-2.0
#include "clab/bench/subsample.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>
#include <unordered_set>

namespace clab::bench {

std::uint64_t subset_seed(std::uint64_t master, Scalar fraction, Index repeat)
{
    // master XOR hash(fraction bits, repeat); the hash chains splitmix64.
    std::uint64_t h = splitmix64(double_bits(fraction));
    h = splitmix64(h ^ static_cast<std::uint64_t>(repeat));
    return master ^ h;
}

namespace {

/// Locations of each class inside `pool`, classes ascending, locations in
/// first-seen pool order. The pool must contain whole locations.
std::map<int, std::vector<std::int64_t>>
locations_by_class(const data::Dataset& ds, std::span<const Index> pool)
{
    std::map<int, std::vector<std::int64_t>> by_class;
    std::unordered_set<std::int64_t> seen;
    std::unordered_map<std::int64_t, std::size_t> counts;
    for (Index i : pool) {
        const data::Sample& s = ds[i];
        ++counts[s.location_id];
        if (seen.insert(s.location_id).second)
            by_class[s.label].push_back(s.location_id);
    }
    for (const auto& [loc, count] : counts)
        require<ContractViolation>(count == ds.location_samples(loc).size(),
                                   "pool must contain whole locations");
    return by_class;
}

/// Draws m entries without replacement, preserving no particular order.
std::vector<std::int64_t> draw(std::vector<std::int64_t> items, std::size_t m, Rng& rng)
{
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t j = i + rng.uniform_index(items.size() - i);
        std::swap(items[i], items[j]);
    }
    items.resize(m);
    return items;
}

std::vector<Index> gather_selected(std::span<const Index> pool, const data::Dataset& ds,
                                   const std::unordered_set<std::int64_t>& chosen)
{
    std::vector<Index> out;
    for (Index i : pool)
        if (chosen.count(ds[i].location_id)) out.push_back(i);
    return out;
}

} // namespace

std::vector<Index> stratified_subsample(const data::Dataset& ds, std::span<const Index> pool,
                                        Scalar fraction, Rng& rng)
{
    require<ConfigError>(fraction > 0.0 && fraction <= 1.0, "fraction must be in (0, 1]");
    require<ConfigError>(!pool.empty(), "cannot subsample an empty pool");
    if (fraction == 1.0) return {pool.begin(), pool.end()};

    std::unordered_set<std::int64_t> chosen;
    for (auto& [cls, locs] : locations_by_class(ds, pool)) {
        require<ConfigError>(!locs.empty(), "class without samples in the pool");
        const auto m = static_cast<std::size_t>(std::max<long>(
            1, std::lround(fraction * static_cast<Scalar>(locs.size()))));
        for (std::int64_t loc : draw(locs, std::min(m, locs.size()), rng))
            chosen.insert(loc);
    }
    return gather_selected(pool, ds, chosen);
}

std::vector<Index> stratified_subsample(const data::Dataset& ds, Scalar fraction, Rng& rng)
{
    std::vector<Index> pool(static_cast<std::size_t>(ds.size()));
    for (Index i = 0; i < ds.size(); ++i) pool[static_cast<std::size_t>(i)] = i;
    return stratified_subsample(ds, pool, fraction, rng);
}

std::pair<std::vector<Index>, std::vector<Index>>
stratified_holdout(const data::Dataset& ds, Scalar holdout_fraction, Rng& rng)
{
    require<ConfigError>(holdout_fraction >= 0.0 && holdout_fraction < 1.0,
                         "holdout fraction must be in [0, 1)");
    std::vector<Index> all(static_cast<std::size_t>(ds.size()));
    for (Index i = 0; i < ds.size(); ++i) all[static_cast<std::size_t>(i)] = i;
    if (holdout_fraction == 0.0) return {all, {}};

    std::unordered_set<std::int64_t> heldout;
    for (auto& [cls, locs] : locations_by_class(ds, all)) {
        std::size_t m = static_cast<std::size_t>(
            std::lround(holdout_fraction * static_cast<Scalar>(locs.size())));
        if (locs.size() >= 2) m = std::max<std::size_t>(1, m);
        m = std::min(m, locs.size() - 1); // keep at least one training location
        for (std::int64_t loc : draw(locs, m, rng)) heldout.insert(loc);
    }
    std::vector<Index> train, evalset;
    for (Index i : all)
        (heldout.count(ds[i].location_id) ? evalset : train).push_back(i);
    return {train, evalset};
}

std::pair<std::vector<Index>, std::vector<Index>>
split_train_val(const data::Dataset& ds, std::span<const Index> subset, Scalar val_fraction,
                Rng& rng)
{
    require<ConfigError>(val_fraction > 0.0 && val_fraction < 1.0,
                         "validation fraction must be in (0, 1)");
    std::unordered_set<std::int64_t> val_locations;
    std::unordered_set<Index> val_samples;
    for (auto& [cls, locs] : locations_by_class(ds, subset)) {
        if (locs.size() >= 2) {
            const auto m = std::max<std::size_t>(
                1, static_cast<std::size_t>(
                       std::lround(val_fraction * static_cast<Scalar>(locs.size()))));
            for (std::int64_t loc : draw(locs, std::min(m, locs.size() - 1), rng))
                val_locations.insert(loc);
        } else {
            // Single selected location: its last-timestamp view validates.
            const auto& rows = ds.location_samples(locs.front());
            if (rows.size() >= 2) val_samples.insert(rows.back());
        }
    }
    std::vector<Index> train, val;
    for (Index i : subset) {
        if (val_locations.count(ds[i].location_id) || val_samples.count(i))
            val.push_back(i);
        else
            train.push_back(i);
    }
    return {train, val};
}

} // namespace clab::bench
