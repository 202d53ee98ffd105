// SPDX-License-Identifier: Apache-2.0
#ifndef CLAB_NN_TENSOR_HPP
#define CLAB_NN_TENSOR_HPP

#include "clab/common.hpp"
#include "clab/errors.hpp"

#include <optional>
#include <string>
#include <vector>

namespace clab::nn {

/// Dense tensor: shape, flat row-major f64 data, optional same-shape gradient.
struct Tensor {
    std::vector<Index> shape;
    Vec data;
    std::optional<Vec> grad;

    Tensor() = default;

    explicit Tensor(std::vector<Index> s) : shape(std::move(s))
    {
        for (Index d : shape)
            require<ContractViolation>(d > 0, "tensor dimensions must be positive");
        data = Vec::Zero(numel_of(shape));
    }

    static Tensor from_matrix(const Mat& m)
    {
        Tensor t({m.rows(), m.cols()});
        t.matrix() = m;
        return t;
    }

    static Tensor from_vector(const Vec& v)
    {
        Tensor t({v.size()});
        t.data = v;
        return t;
    }

    Index numel() const { return data.size(); }
    int rank() const { return static_cast<int>(shape.size()); }

    /// Row/column extents of the rank-2 view. Rank-1 tensors view as 1 x n.
    Index view_rows() const
    {
        require<ContractViolation>(rank() >= 1 && rank() <= 2, "matrix view needs rank 1 or 2");
        return rank() == 2 ? shape[0] : 1;
    }
    Index view_cols() const { return rank() == 2 ? shape[1] : shape[0]; }

    MatMap matrix() { return MatMap(data.data(), view_rows(), view_cols()); }
    ConstMatMap matrix() const { return ConstMatMap(data.data(), view_rows(), view_cols()); }

    bool has_grad() const { return grad.has_value(); }

    /// Allocates a zero gradient buffer when absent.
    void ensure_grad()
    {
        if (!grad) grad = Vec::Zero(numel());
    }

    MatMap grad_matrix()
    {
        require<UsageError>(grad.has_value(), "gradient not populated");
        return MatMap(grad->data(), view_rows(), view_cols());
    }

    void clear_grad() { grad.reset(); }

    void check_finite(const std::string& what) const
    {
        require<NumericError>(data.allFinite(), "non-finite values in " + what);
        if (grad)
            require<NumericError>(grad->allFinite(), "non-finite gradient in " + what);
    }

    static Index numel_of(const std::vector<Index>& s)
    {
        Index n = 1;
        for (Index d : s) n *= d;
        return n;
    }
};

} // namespace clab::nn

#endif // CLAB_NN_TENSOR_HPP
