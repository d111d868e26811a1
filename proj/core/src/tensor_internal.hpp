// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "moop/tensor.hpp"

namespace moop::ad {

struct Node {
    using Rule = std::function<void(const Node& self, std::span<const std::span<double>> parent_grads)>;

    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;
    std::vector<std::shared_ptr<Node>> parents;
    Rule backward;
    bool requires_grad = false;
    bool trainable = false;
    std::string name;

    static Tensor wrap(std::shared_ptr<Node> node) { return Tensor(std::move(node)); }
    static const std::shared_ptr<Node>& unwrap(const Tensor& t) { return t.node_; }
};

/// Builds an op output. The rule is dropped (and parents released) when no
/// input needs a gradient, so inference graphs cost no more than their values.
Tensor make_op(Shape shape, std::vector<double> value, std::vector<Tensor> parents, Node::Rule rule);

} // namespace moop::ad
