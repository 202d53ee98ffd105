// SPDX-License-Identifier: Apache-2.0
#ifndef CLAB_NN_TAPE_HPP
#define CLAB_NN_TAPE_HPP

#include "clab/nn/param_set.hpp"

#include <functional>
#include <span>
#include <vector>

namespace clab::nn {

class Tape;

/// Handle to a node on a Tape. Cheap to copy.
struct Var {
    Tape* tape = nullptr;
    std::size_t index = 0;
    bool valid() const { return tape != nullptr; }
};

/// Reverse-mode autodiff over dense matrices. Nodes are recorded in forward
/// order; backward() walks them in reverse. All node values are checked finite
/// at creation and all flushed gradients at the end of backward().
class Tape {
public:
    /// Non-differentiable input.
    Var constant(Mat value);

    /// Differentiable input whose gradient is queried through grad().
    Var leaf(Mat value);

    /// Differentiable input bound to a named parameter; backward() accumulates
    /// the node gradient into the parameter's grad buffer.
    Var param(ParamSet& set, const std::string& name);

    /// Read-only parameter input: no gradient ever flows to the set.
    Var param(const ParamSet& set, const std::string& name);

    const Mat& value(Var v) const;

    /// Gradient of the last backward() pass w.r.t. a leaf/param node.
    const Mat& grad(Var v) const;

    /// Seeds d(loss)/d(loss) = 1 and accumulates gradients into all bound
    /// parameter sets. loss must be a 1x1 node recorded on this tape.
    /// Repeated calls accumulate into parameter grads.
    void backward(Var loss);

    std::size_t size() const { return nodes_.size(); }

    // --- op-author interface -------------------------------------------------

    using BackwardFn = std::function<void(Tape&, std::size_t self)>;

    Var emit(Mat value, std::vector<std::size_t> inputs, BackwardFn backward_fn);

    const Mat& node_value(std::size_t i) const { return nodes_[i].value; }
    bool node_needs_grad(std::size_t i) const { return nodes_[i].needs_grad; }

    /// Gradient buffer of node i, allocated as zeros on first touch.
    Mat& node_grad(std::size_t i);

    /// Adds g into node i's gradient if it is differentiable.
    void accumulate(std::size_t i, const Mat& g);

private:
    struct Node {
        Mat value;
        Mat grad;
        bool needs_grad = false;
        bool grad_live = false;
        std::vector<std::size_t> inputs;
        BackwardFn backward_fn;
    };

    struct Binding {
        ParamSet* set;
        std::size_t param_index;
        std::size_t node;
    };

    Var push(Node n);

    std::vector<Node> nodes_;
    std::vector<Binding> bindings_;
    std::vector<ParamSet*> bound_sets_;
};

//==============================================================================
// Ops (free functions; inputs must share one tape)
//==============================================================================

/// C = A * B.
Var matmul(Var a, Var b);

/// Y = X + ones * b, with b a 1 x n row broadcast over rows of X.
Var add_rowwise(Var x, Var bias);

/// affine(x, w, b) = x * w + b.
Var affine(Var x, Var weight, Var bias);

Var relu(Var x);

/// Rows scaled to unit Euclidean norm. Throws NumericError on ~zero rows.
Var l2_normalize_rows(Var x);

/// Mean over the batch of -log softmax(logits)[label]; returns a 1x1 node.
Var softmax_cross_entropy(Var logits, std::span<const int> labels);

/// Mean of all coefficients; returns a 1x1 node.
Var mean_all(Var x);

/// 3x3 same-padding convolution over images stored as rows with layout
/// (y * width + x) * channels + c. kernel is (9*channels_in) x channels_out,
/// bias 1 x channels_out. Output rows use the same layout with channels_out.
Var conv3x3_same(Var images, Var kernel, Var bias, Index height, Index width,
                 Index channels_in, Index channels_out);

} // namespace clab::nn

#endif // CLAB_NN_TAPE_HPP
