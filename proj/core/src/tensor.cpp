// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <sstream>
#include <unordered_set>

#include "moop/error.hpp"
#include "tensor_internal.hpp"

namespace moop::ad {

std::size_t numel(const Shape& shape) noexcept {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    return n;
}

std::string to_string(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
    os << ']';
    return os.str();
}

namespace {

std::shared_ptr<Node> make_leaf(Shape shape, std::vector<double> values, bool trainable, std::string name) {
    if (values.size() != numel(shape))
        throw ShapeError("tensor: " + std::to_string(values.size()) + " values do not fill shape " + to_string(shape));
    for (auto d : shape)
        if (d == 0) throw ShapeError("tensor: zero extent in shape " + to_string(shape));
    auto node = std::make_shared<Node>();
    node->shape = std::move(shape);
    node->value = std::move(values);
    node->trainable = trainable;
    node->requires_grad = trainable;
    node->name = std::move(name);
    return node;
}

const Node& deref(const std::shared_ptr<Node>& n) {
    if (!n) throw std::logic_error("tensor: use of an undefined tensor");
    return *n;
}

} // namespace

Tensor make_op(Shape shape, std::vector<double> value, std::vector<Tensor> parents, Node::Rule rule) {
    auto node = std::make_shared<Node>();
    node->shape = std::move(shape);
    node->value = std::move(value);
    bool needs = false;
    for (const auto& p : parents) needs = needs || (p.defined() && p.requires_grad());
    if (needs) {
        node->requires_grad = true;
        node->backward = std::move(rule);
        node->parents.reserve(parents.size());
        for (auto& p : parents) node->parents.push_back(Node::unwrap(p));
    }
    return Node::wrap(std::move(node));
}

Tensor Tensor::constant(Shape shape, std::vector<double> values) {
    return Tensor(make_leaf(std::move(shape), std::move(values), false, {}));
}

Tensor Tensor::zeros(Shape shape) {
    const auto n = moop::ad::numel(shape);
    return constant(std::move(shape), std::vector<double>(n, 0.0));
}

Tensor Tensor::scalar(double value) { return constant({1}, {value}); }

Tensor Tensor::parameter(Shape shape, std::vector<double> values, std::string name) {
    return Tensor(make_leaf(std::move(shape), std::move(values), true, std::move(name)));
}

Tensor Tensor::from_op(Shape shape, std::vector<double> values, std::vector<Tensor> parents, BackwardFn backward) {
    if (values.size() != moop::ad::numel(shape)) throw ShapeError("from_op: values do not fill " + to_string(shape));
    return make_op(std::move(shape), std::move(values), std::move(parents),
                   [fn = std::move(backward)](const Node& self, std::span<const std::span<double>> pg) {
                       fn(self.grad, pg);
                   });
}

const Shape& Tensor::shape() const { return deref(node_).shape; }
std::size_t Tensor::numel() const { return deref(node_).value.size(); }
std::span<const double> Tensor::values() const { return deref(node_).value; }

std::span<double> Tensor::mutable_values() {
    deref(node_);
    if (!node_->parents.empty() || node_->backward)
        throw std::logic_error("tensor: values of an op output are read-only");
    return node_->value;
}

double Tensor::item() const {
    if (numel() != 1) throw ShapeError("tensor: item() on shape " + to_string(shape()));
    return node_->value[0];
}

std::span<const double> Tensor::grad() const { return deref(node_).grad; }
std::span<double> Tensor::mutable_grad() {
    deref(node_);
    return node_->grad;
}
bool Tensor::has_grad() const { return !deref(node_).grad.empty(); }
void Tensor::zero_grad() {
    deref(node_);
    std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}
bool Tensor::requires_grad() const { return deref(node_).requires_grad; }
bool Tensor::trainable() const { return deref(node_).trainable; }
const std::string& Tensor::name() const { return deref(node_).name; }

Tensor Tensor::detach() const {
    const Node& n = deref(node_);
    return constant(n.shape, n.value);
}

void Tensor::backward() const {
    const Node& root = deref(node_);
    if (root.value.size() != 1) throw ShapeError("backward: loss must be a scalar, got shape " + to_string(root.shape));
    if (!root.requires_grad) return;

    // Iterative post-order DFS gives a topological order (parents first).
    std::vector<Node*> order;
    std::unordered_set<const Node*> visited;
    std::vector<std::pair<Node*, std::size_t>> stack;
    stack.emplace_back(node_.get(), 0);
    visited.insert(node_.get());
    while (!stack.empty()) {
        auto& [n, next] = stack.back();
        if (next < n->parents.size()) {
            Node* p = n->parents[next++].get();
            if (p->requires_grad && visited.insert(p).second) stack.emplace_back(p, 0);
        } else {
            order.push_back(n);
            stack.pop_back();
        }
    }

    for (Node* n : order) {
        if (n->trainable) {
            if (n->grad.size() != n->value.size()) n->grad.assign(n->value.size(), 0.0);
        } else {
            n->grad.assign(n->value.size(), 0.0);
        }
    }
    node_->grad[0] += 1.0;

    std::vector<std::span<double>> parent_grads;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* n = *it;
        if (!n->backward) continue;
        parent_grads.clear();
        for (auto& p : n->parents)
            parent_grads.push_back(p->requires_grad ? std::span<double>(p->grad) : std::span<double>());
        n->backward(*n, parent_grads);
    }
    // Intermediate gradients are only meaningful during the sweep.
    for (Node* n : order)
        if (!n->trainable && n != node_.get()) std::vector<double>().swap(n->grad);
}

} // namespace moop::ad
