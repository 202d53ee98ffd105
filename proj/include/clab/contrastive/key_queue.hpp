// SPDX-License-Identifier: Apache-2.0
#ifndef CLAB_CONTRASTIVE_KEY_QUEUE_HPP
#define CLAB_CONTRASTIVE_KEY_QUEUE_HPP

#include "clab/common.hpp"
#include "clab/errors.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace clab::moco {

/// FIFO dictionary of unit-norm key embeddings tagged with the location that
/// produced them. Oldest entries are evicted first, exactly.
class KeyQueue {
public:
    KeyQueue(Index capacity, Index dim) : buffer_(capacity, dim), ids_(capacity, 0)
    {
        require<ConfigError>(capacity > 0, "queue capacity must be positive");
        require<ConfigError>(dim > 0, "queue embedding dim must be positive");
    }

    Index capacity() const { return buffer_.rows(); }
    Index dim() const { return buffer_.cols(); }
    Index size() const { return count_; }

    /// Appends a batch of keys newest-last; evicts exactly the overflow count
    /// of oldest entries. Batch size must not exceed capacity.
    void enqueue(const Mat& keys, std::span<const std::int64_t> location_ids)
    {
        require<ContractViolation>(keys.rows() == static_cast<Index>(location_ids.size()),
                                   "one location id per key required");
        require<ConfigError>(keys.rows() <= capacity(),
                             "enqueue batch larger than queue capacity");
        require<ContractViolation>(keys.cols() == dim(), "key dimension mismatch");
        for (Index r = 0; r < keys.rows(); ++r)
            require<ContractViolation>(std::abs(keys.row(r).norm() - 1.0) <= 1e-9,
                                       "queued keys must be unit norm");
        for (Index r = 0; r < keys.rows(); ++r) {
            const Index slot = (head_ + count_) % capacity();
            buffer_.row(slot) = keys.row(r);
            ids_[static_cast<std::size_t>(slot)] = location_ids[static_cast<std::size_t>(r)];
            if (count_ < capacity())
                ++count_;
            else
                head_ = (head_ + 1) % capacity();
        }
    }

    /// Current entries oldest-first.
    Mat embeddings() const
    {
        Mat out(count_, dim());
        for (Index i = 0; i < count_; ++i)
            out.row(i) = buffer_.row((head_ + i) % capacity());
        return out;
    }

    std::vector<std::int64_t> location_ids() const
    {
        std::vector<std::int64_t> out(static_cast<std::size_t>(count_));
        for (Index i = 0; i < count_; ++i)
            out[static_cast<std::size_t>(i)] =
                ids_[static_cast<std::size_t>((head_ + i) % capacity())];
        return out;
    }

private:
    Mat buffer_; // ring storage, capacity x dim
    std::vector<std::int64_t> ids_;
    Index head_ = 0;
    Index count_ = 0;
};

} // namespace clab::moco

#endif // CLAB_CONTRASTIVE_KEY_QUEUE_HPP
