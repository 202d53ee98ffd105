// SPDX-License-Identifier: Apache-2.0
#include "clab/eval/knn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace clab::eval {

std::vector<int> knn_predict(const FeatureBank& train, const Mat& queries, Index k,
                             Scalar vote_temperature)
{
    require<ContractViolation>(train.size() > 0, "k-NN needs a non-empty feature bank");
    require<ConfigError>(vote_temperature > 0.0, "vote temperature must be positive");
    require<ContractViolation>(queries.cols() == train.dim(),
                               "query dimension does not match the bank");
    k = std::max<Index>(1, std::min(k, train.size()));

    const FeatureBank bank = train.normalized ? train : normalized_rows(train);
    Mat qn = queries;
    for (Index r = 0; r < qn.rows(); ++r) {
        const Scalar n = qn.row(r).norm();
        if (n > 0.0) qn.row(r) /= n;
    }

    int num_classes = 0;
    for (int y : bank.labels) num_classes = std::max(num_classes, y + 1);

    std::vector<int> out(static_cast<std::size_t>(qn.rows()));
    std::vector<Index> idx(static_cast<std::size_t>(bank.size()));
    std::vector<Scalar> votes(static_cast<std::size_t>(num_classes));
    for (Index r = 0; r < qn.rows(); ++r) {
        const Vec sims = bank.features * qn.row(r).transpose();
        std::iota(idx.begin(), idx.end(), Index{0});
        // Neighbour order: similarity descending, index ascending on ties.
        std::partial_sort(idx.begin(), idx.begin() + k, idx.end(),
                          [&sims](Index a, Index b) {
                              if (sims[a] != sims[b]) return sims[a] > sims[b];
                              return a < b;
                          });
        std::fill(votes.begin(), votes.end(), 0.0);
        for (Index j = 0; j < k; ++j) {
            const Index nb = idx[static_cast<std::size_t>(j)];
            votes[static_cast<std::size_t>(bank.labels[static_cast<std::size_t>(nb)])] +=
                std::exp(sims[nb] / vote_temperature);
        }
        int best = 0;
        for (int c = 1; c < num_classes; ++c)
            if (votes[static_cast<std::size_t>(c)] > votes[static_cast<std::size_t>(best)])
                best = c;
        out[static_cast<std::size_t>(r)] = best;
    }
    return out;
}

} // namespace clab::eval
