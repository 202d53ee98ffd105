// SPDX-License-Identifier: Apache-2.0
#include "clab/contrastive/info_nce.hpp"

#include <cmath>
#include <memory>

namespace clab::moco {

using nn::Tape;
using nn::Var;

namespace {

void check_unit_rows(const Mat& m, const char* what)
{
    for (Index r = 0; r < m.rows(); ++r)
        require<ContractViolation>(std::abs(m.row(r).norm() - 1.0) <= 1e-6,
                                   std::string(what) + " rows must be unit norm");
}

} // namespace

Var info_nce(Var q, Var k_pos, const Mat& negatives,
             std::span<const std::int64_t> negative_ids,
             std::span<const std::int64_t> query_ids, Scalar temperature,
             bool mask_false_negatives)
{
    require<ConfigError>(temperature > 0.0, "temperature must be positive");
    require<UsageError>(q.valid() && k_pos.valid() && q.tape == k_pos.tape,
                        "q and k_pos must come from the same tape");
    Tape& t = *q.tape;
    const Mat& qv = t.value(q);
    const Mat& kv = t.value(k_pos);
    const Index batch = qv.rows();
    const Index dim = qv.cols();
    const Index n_neg = negatives.rows();
    require<ContractViolation>(kv.rows() == batch && kv.cols() == dim,
                               "q and k_pos shapes differ");
    require<ContractViolation>(n_neg == 0 || negatives.cols() == dim,
                               "negative dimension mismatch");
    require<ContractViolation>(static_cast<Index>(negative_ids.size()) == n_neg,
                               "one location id per negative required");
    require<ContractViolation>(static_cast<Index>(query_ids.size()) == batch,
                               "one location id per query required");
    check_unit_rows(qv, "query");
    check_unit_rows(kv, "positive key");
    check_unit_rows(negatives, "negative");

    const Vec pos = (qv.array() * kv.array()).rowwise().sum() / temperature;
    Mat neg;                // batch x n_neg, scaled similarities
    if (n_neg > 0) neg = (qv * negatives.transpose()) / temperature;

    auto keep = std::make_shared<std::vector<std::uint8_t>>(
        static_cast<std::size_t>(batch * n_neg), std::uint8_t{1});
    if (mask_false_negatives) {
        for (Index b = 0; b < batch; ++b)
            for (Index j = 0; j < n_neg; ++j)
                if (negative_ids[static_cast<std::size_t>(j)] ==
                    query_ids[static_cast<std::size_t>(b)])
                    (*keep)[static_cast<std::size_t>(b * n_neg + j)] = 0;
    }

    // Log-sum-exp over {pos} u kept negatives, per row. probs holds the
    // softmax weights needed by the backward pass (masked entries stay 0).
    auto pos_prob = std::make_shared<Vec>(batch);
    auto neg_prob = std::make_shared<Mat>(Mat::Zero(batch, n_neg));
    Mat losses(batch, 1);
    for (Index b = 0; b < batch; ++b) {
        Scalar m = pos[b];
        for (Index j = 0; j < n_neg; ++j)
            if ((*keep)[static_cast<std::size_t>(b * n_neg + j)] && neg(b, j) > m)
                m = neg(b, j);
        Scalar denom = std::exp(pos[b] - m);
        for (Index j = 0; j < n_neg; ++j)
            if ((*keep)[static_cast<std::size_t>(b * n_neg + j)]) {
                const Scalar e = std::exp(neg(b, j) - m);
                (*neg_prob)(b, j) = e;
                denom += e;
            }
        (*pos_prob)[b] = std::exp(pos[b] - m) / denom;
        neg_prob->row(b) /= denom;
        losses(b, 0) = m - pos[b] + std::log(denom);
    }

    Mat negatives_copy = negatives;
    const std::size_t iq = q.index, ik = k_pos.index;
    return t.emit(std::move(losses), {iq, ik},
                  [iq, ik, pos_prob, neg_prob, negs = std::move(negatives_copy),
                   temperature](Tape& tp, std::size_t self) {
                      const Mat& g = tp.node_grad(self); // B x 1
                      const Mat& qv = tp.node_value(iq);
                      const Mat& kv = tp.node_value(ik);
                      const Vec coef = g.col(0).cwiseProduct(
                          (pos_prob->array() - 1.0).matrix()) / temperature;
                      // d/dq = coef * k+  +  (g/t) * sum_j p_j * neg_j
                      Mat dq = coef.asDiagonal() * kv;
                      if (negs.rows() > 0) {
                          Mat w = neg_prob->array().colwise() *
                                  (g.col(0).array() / temperature);
                          dq += w * negs;
                      }
                      tp.accumulate(iq, dq);
                      tp.accumulate(ik, coef.asDiagonal() * qv);
                  });
}

Scalar info_nce_loss(const Vec& q, const Vec& k_pos,
                     const std::vector<std::pair<Vec, std::int64_t>>& negatives,
                     std::int64_t query_location, Scalar temperature,
                     bool mask_false_negatives)
{
    Tape tape;
    Mat negs(static_cast<Index>(negatives.size()), q.size());
    std::vector<std::int64_t> neg_ids(negatives.size());
    for (std::size_t i = 0; i < negatives.size(); ++i) {
        require<ContractViolation>(negatives[i].first.size() == q.size(),
                                   "negative dimension mismatch");
        negs.row(static_cast<Index>(i)) = negatives[i].first.transpose();
        neg_ids[i] = negatives[i].second;
    }
    const std::int64_t qid[1] = {query_location};
    Var loss = info_nce(tape.constant(q.transpose()), tape.constant(k_pos.transpose()),
                        negs, neg_ids, qid, temperature, mask_false_negatives);
    return tape.value(loss)(0, 0);
}

} // namespace clab::moco
