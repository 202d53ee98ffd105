// SPDX-License-Identifier: Apache-2.0
#ifndef CLAB_CONTRASTIVE_INFO_NCE_HPP
#define CLAB_CONTRASTIVE_INFO_NCE_HPP

#include "clab/nn/tape.hpp"

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace clab::moco {

/// Temperature-scaled contrastive loss per query row:
///   loss = -log( exp(q.k+ / t) / (exp(q.k+ / t) + sum_kept exp(q.k- / t)) )
/// With masking enabled, negatives whose location id equals the query's are
/// dropped from the sum. Returns a B x 1 node of per-sample losses,
/// differentiable w.r.t. q and k_pos; negatives are constants.
/// All rows must be unit-norm within 1e-6.
nn::Var info_nce(nn::Var q, nn::Var k_pos, const Mat& negatives,
                 std::span<const std::int64_t> negative_ids,
                 std::span<const std::int64_t> query_ids, Scalar temperature,
                 bool mask_false_negatives);

/// Single-query convenience without gradients.
Scalar info_nce_loss(const Vec& q, const Vec& k_pos,
                     const std::vector<std::pair<Vec, std::int64_t>>& negatives,
                     std::int64_t query_location, Scalar temperature,
                     bool mask_false_negatives);

} // namespace clab::moco

#endif // CLAB_CONTRASTIVE_INFO_NCE_HPP
