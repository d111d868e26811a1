// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace moop {
class Rng;
}

namespace moop::ad {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape) noexcept;
std::string to_string(const Shape& shape);

struct Node;

/// Handle to a node of a reverse-mode differentiation graph.
///
/// Values are row-major doubles. A tensor is either a leaf (constant or
/// trainable parameter) or the output of one of the operations below, in
/// which case it keeps its inputs alive. Copies share the node.
class Tensor {
public:
    Tensor() = default;

    static Tensor constant(Shape shape, std::vector<double> values);
    static Tensor zeros(Shape shape);
    static Tensor scalar(double value);
    /// Trainable leaf: accumulates gradients across backward() calls until zero_grad().
    static Tensor parameter(Shape shape, std::vector<double> values, std::string name = {});

    /// Gradient of one output with respect to its parents. `out_grad` is the
    /// incoming gradient of the op's output; `parent_grads[i]` is empty when
    /// parent i does not require a gradient and must be accumulated into otherwise.
    using BackwardFn = std::function<void(std::span<const double> out_grad,
                                          std::span<const std::span<double>> parent_grads)>;

    /// Escape hatch for defining a new op outside this library (tests use it
    /// to build a deliberately wrong backward rule).
    static Tensor from_op(Shape shape, std::vector<double> values, std::vector<Tensor> parents, BackwardFn backward);

    bool defined() const noexcept { return node_ != nullptr; }
    explicit operator bool() const noexcept { return defined(); }

    const Shape& shape() const;
    std::size_t rank() const { return shape().size(); }
    std::size_t dim(std::size_t axis) const { return shape().at(axis); }
    std::size_t numel() const;

    std::span<const double> values() const;
    /// Writable view of a leaf's values (optimizers, finite differences).
    std::span<double> mutable_values();
    double item() const;
    double at(std::size_t flat) const { return values()[flat]; }

    /// Empty until a backward pass reaches this tensor.
    std::span<const double> grad() const;
    std::span<double> mutable_grad();
    bool has_grad() const;
    void zero_grad();

    bool requires_grad() const;
    bool trainable() const;
    const std::string& name() const;

    /// Same values, cut from the graph.
    Tensor detach() const;

    /// Reverse sweep from this scalar. Throws ShapeError if it is not a scalar.
    void backward() const;

    const Node* node() const noexcept { return node_.get(); }

private:
    explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}
    std::shared_ptr<Node> node_;
    friend struct Node;
};

// Forward primitives. Every one records a graph node when any input needs a
// gradient and checks shapes, throwing ShapeError with both shapes on mismatch.

/// [m,k] x [k,n] -> [m,n].
Tensor matmul(const Tensor& a, const Tensor& b);
/// x: [in] or [rows,in]; weight: [in,out]; bias: [out] or undefined.
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias = {});
/// The same [c_in,c_out] map applied to every row of a [n,c_in] sequence
/// (a kernel-size-1 convolution over n positions).
Tensor pointwise_linear(const Tensor& seq, const Tensor& weight, const Tensor& bias = {});

Tensor tanh(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor relu(const Tensor& x);

Tensor softmax(const Tensor& x, std::size_t axis);
Tensor log_softmax(const Tensor& x, std::size_t axis);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double factor);

Tensor concat(std::span<const Tensor> parts, std::size_t axis);
inline Tensor concat(std::initializer_list<Tensor> parts, std::size_t axis) {
    return concat(std::span<const Tensor>(parts.begin(), parts.size()), axis);
}

/// Positions where mask != 0 are replaced by `fill` (default -inf) and get no gradient.
Tensor masked_fill(const Tensor& x, std::span<const char> mask,
                   double fill = -std::numeric_limits<double>::infinity());

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
/// mean((a - b)^2) as a scalar.
Tensor squared_error(const Tensor& a, const Tensor& b);

/// Same values, new shape of equal element count.
Tensor reshape(const Tensor& x, Shape shape);
/// Row i of a [rows,cols] tensor as [1,cols].
Tensor select_row(const Tensor& x, std::size_t row);
/// One element as a [1] tensor.
Tensor pick(const Tensor& x, std::size_t flat_index);

/// Inverted dropout: each element is zeroed with probability `rate` and
/// survivors are scaled by 1/(1-rate). Identity when !training or rate == 0.
Tensor dropout(const Tensor& x, double rate, Rng& rng, bool training);

/// Optimizer hyperparameters plus per-parameter moments.
struct AdamState {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::int64_t step = 0;
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;
};

/// One bias-corrected Adam update of every parameter, then zeroes the
/// gradients. Throws std::logic_error if a parameter has no gradient.
void adam_step(std::span<Tensor> params, AdamState& state);

void zero_grad(std::span<Tensor> params);
double grad_norm(std::span<const Tensor> params);
/// Rescales all gradients so their joint L2 norm is at most max_norm. Returns the norm before clipping.
double clip_grad_norm(std::span<Tensor> params, double max_norm);

/// Compares backward() against central differences for every element of
/// every parameter. `loss` must rebuild the graph from the current parameter
/// values on each call. Returns max |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
double grad_check(const std::function<Tensor()>& loss, std::span<Tensor> params, double eps = 1e-4);

} // namespace moop::ad
