// SPDX-License-Identifier: Apache-2.0
#include "clab/nn/tape.hpp"

#include <memory>

namespace clab::nn {

namespace {

void check_same_tape(Var a, Var b)
{
    require<UsageError>(a.valid() && b.valid() && a.tape == b.tape,
                        "op inputs must come from the same tape");
}

} // namespace

Var Tape::push(Node n)
{
    require<NumericError>(n.value.allFinite(), "non-finite values in forward pass");
    nodes_.push_back(std::move(n));
    return Var{this, nodes_.size() - 1};
}

Var Tape::constant(Mat value)
{
    Node n;
    n.value = std::move(value);
    return push(std::move(n));
}

Var Tape::leaf(Mat value)
{
    Node n;
    n.value = std::move(value);
    n.needs_grad = true;
    return push(std::move(n));
}

Var Tape::param(ParamSet& set, const std::string& name)
{
    const Tensor& t = set.at(name);
    Node n;
    n.value = t.matrix();
    n.needs_grad = true;
    Var v = push(std::move(n));

    std::size_t param_index = 0;
    for (std::size_t i = 0; i < set.names().size(); ++i)
        if (set.names()[i] == name) param_index = i;
    bindings_.push_back(Binding{&set, param_index, v.index});

    bool seen = false;
    for (ParamSet* s : bound_sets_)
        if (s == &set) seen = true;
    if (!seen) bound_sets_.push_back(&set);
    return v;
}

Var Tape::param(const ParamSet& set, const std::string& name)
{
    return constant(set.at(name).matrix());
}

const Mat& Tape::value(Var v) const
{
    require<UsageError>(v.tape == this && v.index < nodes_.size(), "invalid tape handle");
    return nodes_[v.index].value;
}

const Mat& Tape::grad(Var v) const
{
    require<UsageError>(v.tape == this && v.index < nodes_.size(), "invalid tape handle");
    const Node& n = nodes_[v.index];
    require<UsageError>(n.grad_live, "gradient not populated; run backward() first");
    return n.grad;
}

Mat& Tape::node_grad(std::size_t i)
{
    Node& n = nodes_[i];
    if (!n.grad_live) {
        n.grad = Mat::Zero(n.value.rows(), n.value.cols());
        n.grad_live = true;
    }
    return n.grad;
}

void Tape::accumulate(std::size_t i, const Mat& g)
{
    if (!nodes_[i].needs_grad) return;
    node_grad(i) += g;
}

Var Tape::emit(Mat value, std::vector<std::size_t> inputs, BackwardFn backward_fn)
{
    Node n;
    n.value = std::move(value);
    for (std::size_t i : inputs)
        if (nodes_[i].needs_grad) n.needs_grad = true;
    if (n.needs_grad) {
        n.inputs = std::move(inputs);
        n.backward_fn = std::move(backward_fn);
    }
    return push(std::move(n));
}

void Tape::backward(Var loss)
{
    require<UsageError>(!nodes_.empty(), "backward without a recorded graph");
    require<UsageError>(loss.tape == this && loss.index < nodes_.size(),
                        "loss does not belong to this tape");
    const Node& ln = nodes_[loss.index];
    require<UsageError>(ln.value.rows() == 1 && ln.value.cols() == 1,
                        "backward expects a scalar (1x1) loss");
    require<UsageError>(ln.needs_grad,
                        "loss is not differentiable (no parameters or leaves reach it)");

    for (Node& n : nodes_) {
        n.grad_live = false;
        n.grad.resize(0, 0);
    }
    node_grad(loss.index)(0, 0) = 1.0;

    for (std::size_t i = nodes_.size(); i-- > 0;) {
        Node& n = nodes_[i];
        if (!n.needs_grad || !n.grad_live || !n.backward_fn) continue;
        n.backward_fn(*this, i);
    }

    for (const Binding& b : bindings_) {
        const Node& n = nodes_[b.node];
        Tensor& t = b.set->at(b.param_index);
        t.ensure_grad();
        if (n.grad_live)
            MatMap(t.grad->data(), t.view_rows(), t.view_cols()) += n.grad;
    }
    for (ParamSet* s : bound_sets_) {
        s->ensure_zero_grads();
        for (std::size_t i = 0; i < s->size(); ++i)
            require<NumericError>(s->at(i).grad->allFinite(),
                                  "non-finite gradient for parameter " + s->names()[i]);
    }
}

//==============================================================================
// Ops
//==============================================================================

Var matmul(Var a, Var b)
{
    check_same_tape(a, b);
    Tape& t = *a.tape;
    const Mat& av = t.value(a);
    const Mat& bv = t.value(b);
    require<ContractViolation>(av.cols() == bv.rows(), "matmul inner dimensions differ");
    Mat out = av * bv;
    const std::size_t ia = a.index, ib = b.index;
    return t.emit(std::move(out), {ia, ib}, [ia, ib](Tape& tp, std::size_t self) {
        const Mat& g = tp.node_grad(self);
        tp.accumulate(ia, g * tp.node_value(ib).transpose());
        tp.accumulate(ib, tp.node_value(ia).transpose() * g);
    });
}

Var add_rowwise(Var x, Var bias)
{
    check_same_tape(x, bias);
    Tape& t = *x.tape;
    const Mat& xv = t.value(x);
    const Mat& bv = t.value(bias);
    require<ContractViolation>(bv.rows() == 1 && bv.cols() == xv.cols(),
                               "bias must be 1 x cols(x)");
    Mat out = xv.rowwise() + bv.row(0);
    const std::size_t ix = x.index, ib = bias.index;
    return t.emit(std::move(out), {ix, ib}, [ix, ib](Tape& tp, std::size_t self) {
        const Mat& g = tp.node_grad(self);
        tp.accumulate(ix, g);
        tp.accumulate(ib, g.colwise().sum());
    });
}

Var affine(Var x, Var weight, Var bias)
{
    return add_rowwise(matmul(x, weight), bias);
}

Var relu(Var x)
{
    Tape& t = *x.tape;
    const Mat& xv = t.value(x);
    Mat out = xv.cwiseMax(0.0);
    const std::size_t ix = x.index;
    return t.emit(std::move(out), {ix}, [ix](Tape& tp, std::size_t self) {
        const Mat& g = tp.node_grad(self);
        const Mat& xin = tp.node_value(ix);
        tp.accumulate(ix, (xin.array() > 0.0).cast<Scalar>().matrix().cwiseProduct(g));
    });
}

Var l2_normalize_rows(Var x)
{
    Tape& t = *x.tape;
    const Mat& xv = t.value(x);
    auto norms = std::make_shared<Vec>(xv.rowwise().norm());
    require<NumericError>(norms->minCoeff() > 1e-12,
                          "cannot L2-normalize a (near-)zero row");
    Mat out = xv.array().colwise() / norms->array();
    const std::size_t ix = x.index;
    return t.emit(std::move(out), {ix}, [ix, norms](Tape& tp, std::size_t self) {
        const Mat& g = tp.node_grad(self);
        const Mat& y = tp.node_value(self);
        // dx_r = (g_r - (g_r . y_r) y_r) / norm_r
        Vec dots = (g.cwiseProduct(y)).rowwise().sum();
        Mat dx = (g - dots.asDiagonal() * y).array().colwise() / norms->array();
        tp.accumulate(ix, dx);
    });
}

Var softmax_cross_entropy(Var logits, std::span<const int> labels)
{
    Tape& t = *logits.tape;
    const Mat& z = t.value(logits);
    const Index batch = z.rows();
    const Index classes = z.cols();
    require<ContractViolation>(static_cast<Index>(labels.size()) == batch,
                               "label count must match batch size");
    for (int y : labels)
        require<ContractViolation>(y >= 0 && y < classes, "label out of range [0, C)");

    auto probs = std::make_shared<Mat>(batch, classes);
    Scalar total = 0.0;
    for (Index r = 0; r < batch; ++r) {
        const Scalar m = z.row(r).maxCoeff();
        RowVec e = (z.row(r).array() - m).exp();
        const Scalar denom = e.sum();
        probs->row(r) = e / denom;
        total += std::log(denom) + m - z(r, labels[static_cast<std::size_t>(r)]);
    }
    Mat out(1, 1);
    out(0, 0) = total / static_cast<Scalar>(batch);

    std::vector<int> ys(labels.begin(), labels.end());
    const std::size_t iz = logits.index;
    return t.emit(std::move(out), {iz},
                  [iz, probs, ys = std::move(ys), batch](Tape& tp, std::size_t self) {
                      const Scalar gscale = tp.node_grad(self)(0, 0) / static_cast<Scalar>(batch);
                      Mat dz = *probs;
                      for (Index r = 0; r < batch; ++r)
                          dz(r, ys[static_cast<std::size_t>(r)]) -= 1.0;
                      tp.accumulate(iz, dz * gscale);
                  });
}

Var mean_all(Var x)
{
    Tape& t = *x.tape;
    const Mat& xv = t.value(x);
    require<ContractViolation>(xv.size() > 0, "mean of an empty matrix");
    Mat out(1, 1);
    out(0, 0) = xv.mean();
    const std::size_t ix = x.index;
    const Scalar inv = 1.0 / static_cast<Scalar>(xv.size());
    return t.emit(std::move(out), {ix}, [ix, inv](Tape& tp, std::size_t self) {
        const Scalar g = tp.node_grad(self)(0, 0) * inv;
        const Mat& xin = tp.node_value(ix);
        tp.accumulate(ix, Mat::Constant(xin.rows(), xin.cols(), g));
    });
}

namespace {

/// Gathers 3x3 zero-padded patches: output row (b*H + y)*W + x holds the
/// 9*Cin patch values feeding output pixel (y, x) of image b.
Mat im2col3x3(const Mat& images, Index height, Index width, Index cin)
{
    const Index batch = images.rows();
    Mat cols = Mat::Zero(batch * height * width, 9 * cin);
    for (Index b = 0; b < batch; ++b) {
        for (Index y = 0; y < height; ++y) {
            for (Index x = 0; x < width; ++x) {
                const Index row = (b * height + y) * width + x;
                for (Index ky = 0; ky < 3; ++ky) {
                    const Index sy = y + ky - 1;
                    if (sy < 0 || sy >= height) continue;
                    for (Index kx = 0; kx < 3; ++kx) {
                        const Index sx = x + kx - 1;
                        if (sx < 0 || sx >= width) continue;
                        const Index src = (sy * width + sx) * cin;
                        const Index dst = (ky * 3 + kx) * cin;
                        cols.block(row, dst, 1, cin) = images.block(b, src, 1, cin);
                    }
                }
            }
        }
    }
    return cols;
}

void col2im3x3_add(const Mat& dcols, Index height, Index width, Index cin, Mat& dimages)
{
    const Index batch = dimages.rows();
    for (Index b = 0; b < batch; ++b) {
        for (Index y = 0; y < height; ++y) {
            for (Index x = 0; x < width; ++x) {
                const Index row = (b * height + y) * width + x;
                for (Index ky = 0; ky < 3; ++ky) {
                    const Index sy = y + ky - 1;
                    if (sy < 0 || sy >= height) continue;
                    for (Index kx = 0; kx < 3; ++kx) {
                        const Index sx = x + kx - 1;
                        if (sx < 0 || sx >= width) continue;
                        const Index src = (sy * width + sx) * cin;
                        const Index dst = (ky * 3 + kx) * cin;
                        dimages.block(b, src, 1, cin) += dcols.block(row, dst, 1, cin);
                    }
                }
            }
        }
    }
}

} // namespace

Var conv3x3_same(Var images, Var kernel, Var bias, Index height, Index width,
                 Index channels_in, Index channels_out)
{
    check_same_tape(images, kernel);
    check_same_tape(kernel, bias);
    Tape& t = *images.tape;
    const Mat& img = t.value(images);
    const Mat& k = t.value(kernel);
    const Mat& b = t.value(bias);
    require<ContractViolation>(img.cols() == height * width * channels_in,
                               "image row length must equal H*W*Cin");
    require<ContractViolation>(k.rows() == 9 * channels_in && k.cols() == channels_out,
                               "conv kernel must be (9*Cin) x Cout");
    require<ContractViolation>(b.rows() == 1 && b.cols() == channels_out,
                               "conv bias must be 1 x Cout");

    const Index batch = img.rows();
    auto cols = std::make_shared<Mat>(im2col3x3(img, height, width, channels_in));
    Mat flat = (*cols) * k;             // (B*H*W) x Cout
    flat.rowwise() += b.row(0);
    // Same buffer viewed as one row per image.
    Mat out = ConstMatMap(flat.data(), batch, height * width * channels_out);

    const std::size_t ii = images.index, ik = kernel.index, ib = bias.index;
    return t.emit(std::move(out), {ii, ik, ib},
                  [ii, ik, ib, cols, height, width, channels_in, channels_out](
                      Tape& tp, std::size_t self) {
                      const Mat& g = tp.node_grad(self);
                      const Index batch = g.rows();
                      ConstMatMap gflat(g.data(), batch * height * width, channels_out);
                      tp.accumulate(ik, cols->transpose() * gflat);
                      tp.accumulate(ib, gflat.colwise().sum());
                      if (tp.node_needs_grad(ii)) {
                          const Mat& kv = tp.node_value(ik);
                          Mat dcols = gflat * kv.transpose();
                          Mat dimg = Mat::Zero(batch, height * width * channels_in);
                          col2im3x3_add(dcols, height, width, channels_in, dimg);
                          tp.accumulate(ii, dimg);
                      }
                  });
}

} // namespace clab::nn
