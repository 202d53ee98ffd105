// SPDX-License-Identifier: Apache-2.0
#ifndef CLAB_BENCH_SUBSAMPLE_HPP
#define CLAB_BENCH_SUBSAMPLE_HPP

#include "clab/data/dataset.hpp"

#include <utility>

namespace clab::bench {

/// Repeat-specific subsampling seed; documented derivation
/// master XOR hash(fraction bits, repeat).
std::uint64_t subset_seed(std::uint64_t master, Scalar fraction, Index repeat);

/// Class-stratified subsample of `pool` at location granularity: per class
/// with n_c locations in the pool, selects max(1, round(n_c * f)) locations
/// uniformly without replacement; all views of a chosen location come along.
/// f = 1 returns the pool unchanged. The result preserves pool order.
/// The pool must contain whole locations.
std::vector<Index> stratified_subsample(const data::Dataset& ds,
                                        std::span<const Index> pool, Scalar fraction,
                                        Rng& rng);

/// Whole-dataset convenience overload.
std::vector<Index> stratified_subsample(const data::Dataset& ds, Scalar fraction, Rng& rng);

/// Location-stratified split of the full dataset into (train pool, held-out
/// eval); per class, round(holdout * n_c) locations go to eval (at least one
/// when the class has two or more).
std::pair<std::vector<Index>, std::vector<Index>>
stratified_holdout(const data::Dataset& ds, Scalar holdout_fraction, Rng& rng);

/// Train/validation carve of a labeled subset for schedules and early
/// stopping, never touching unselected data. Location-granular; a class with
/// a single selected location contributes its last-timestamp view to the
/// validation side instead. May return an empty validation set (caller
/// falls back to validating on the training split).
std::pair<std::vector<Index>, std::vector<Index>>
split_train_val(const data::Dataset& ds, std::span<const Index> subset, Scalar val_fraction,
                Rng& rng);

} // namespace clab::bench

#endif // CLAB_BENCH_SUBSAMPLE_HPP
