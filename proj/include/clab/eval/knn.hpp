// SPDX-License-Identifier: Apache-2.0
#ifndef CLAB_EVAL_KNN_HPP
#define CLAB_EVAL_KNN_HPP

#include "clab/eval/feature_bank.hpp"

namespace clab::eval {

/// Weighted k-nearest-neighbour vote over cosine similarity. Each of the k
/// closest stored features votes for its label with weight exp(sim / tau);
/// the argmax of summed weights wins, ties falling to the smallest class
/// index. Neighbour order is (similarity desc, index asc). k is clamped to
/// the bank size. Zero-norm rows participate with similarity 0.
std::vector<int> knn_predict(const FeatureBank& train, const Mat& queries, Index k,
                             Scalar vote_temperature);

} // namespace clab::eval

#endif // CLAB_EVAL_KNN_HPP
