// Copyright (C) 2026 The Lion Retrieval Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License"); you may not use this file except in compliance
// with the License. You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software distributed under the License
// is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express
// or implied. See the License for the specific language governing permissions and limitations under the License.

#pragma once

// Dense tensors of rank 0..2 with reverse-mode differentiation.
//
// A tensor is a shared handle onto a graph node. Operations in ops.hpp create
// new nodes that remember their inputs and a local gradient rule; backward()
// orders the reachable nodes topologically (the computation tape) and replays
// the rules in reverse. Storage is an Eigen row-major matrix so that data() is
// the row-major flattening of the logical shape:
//   rank 0 -> 1x1, rank 1 [n] -> 1xn, rank 2 [r, c] -> rxc.

#include <Eigen/Core>

#include <cstddef>
#include <functional>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "lion/errors.hpp"

namespace lion {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Shape = std::vector<std::size_t>;

inline std::string shape_string(const Shape& shape) {
    std::string out = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) out += "x";
        out += std::to_string(shape[i]);
    }
    return out + "]";
}

inline std::size_t shape_numel(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

// Storage (rows, cols) for a logical shape.
inline std::pair<Eigen::Index, Eigen::Index> storage_dims(const Shape& shape) {
    switch (shape.size()) {
        case 0: return {1, 1};
        case 1: return {1, static_cast<Eigen::Index>(shape[0])};
        case 2: return {static_cast<Eigen::Index>(shape[0]), static_cast<Eigen::Index>(shape[1])};
        default: throw DimensionError("tensors of rank > 2 are not supported: " + shape_string(shape));
    }
}

// Graph construction switch. Inference code wraps forward passes in a
// NoGradGuard so no tape is recorded; the flag is per thread.
class GradMode {
 public:
    static bool enabled() { return flag(); }
    static void set_enabled(bool on) { flag() = on; }

 private:
    static bool& flag() {
        thread_local bool enabled = true;
        return enabled;
    }
};

class NoGradGuard {
 public:
    NoGradGuard() : previous_(GradMode::enabled()) { GradMode::set_enabled(false); }
    ~NoGradGuard() { GradMode::set_enabled(previous_); }
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
    bool previous_;
};

namespace detail {

template <typename Scalar>
struct Node {
    using Matrix = MatrixX<Scalar>;

    Shape shape;
    Matrix value;
    Matrix grad;  // empty until first accumulation
    bool requires_grad = false;
    std::string_view op = "leaf";
    std::vector<std::shared_ptr<Node>> inputs;
    // Pushes this node's grad into the grads of its inputs.
    std::function<void(Node&)> backward_fn;

    bool is_leaf() const { return inputs.empty(); }

    template <typename Expr>
    void accumulate(const Expr& g) {
        if (!requires_grad) return;
        if (grad.size() == 0) {
            grad = g;
        } else {
            grad += g;
        }
    }
};

}  // namespace detail

template <typename Scalar>
class BasicTensor {
 public:
    using Matrix = MatrixX<Scalar>;
    using Node = detail::Node<Scalar>;
    using scalar_type = Scalar;

    BasicTensor() : BasicTensor(Shape{}, Matrix::Zero(1, 1)) {}

    BasicTensor(Shape shape, Matrix value) : node_(std::make_shared<Node>()) {
        const auto [rows, cols] = storage_dims(shape);
        if (value.rows() != rows || value.cols() != cols) {
            throw DimensionError("storage " + std::to_string(value.rows()) + "x" + std::to_string(value.cols()) +
                                 " does not match shape " + shape_string(shape));
        }
        node_->shape = std::move(shape);
        node_->value = std::move(value);
    }

    static BasicTensor scalar(Scalar v, bool requires_grad = false) {
        Matrix m(1, 1);
        m(0, 0) = v;
        return BasicTensor(Shape{}, std::move(m)).set_requires_grad(requires_grad);
    }

    static BasicTensor vector(const std::vector<Scalar>& values, bool requires_grad = false) {
        Matrix m(1, static_cast<Eigen::Index>(values.size()));
        for (std::size_t i = 0; i < values.size(); ++i) m(0, static_cast<Eigen::Index>(i)) = values[i];
        return BasicTensor(Shape{values.size()}, std::move(m)).set_requires_grad(requires_grad);
    }

    static BasicTensor matrix(Matrix m, bool requires_grad = false) {
        Shape shape{static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())};
        return BasicTensor(std::move(shape), std::move(m)).set_requires_grad(requires_grad);
    }

    // Row-major data for an arbitrary rank <= 2 shape.
    static BasicTensor from_data(Shape shape, std::span<const Scalar> data, bool requires_grad = false) {
        if (shape_numel(shape) != data.size()) {
            throw DimensionError("shape " + shape_string(shape) + " needs " + std::to_string(shape_numel(shape)) +
                                 " values, got " + std::to_string(data.size()));
        }
        const auto [rows, cols] = storage_dims(shape);
        Matrix m = Eigen::Map<const Matrix>(data.data(), rows, cols);
        return BasicTensor(std::move(shape), std::move(m)).set_requires_grad(requires_grad);
    }

    static BasicTensor zeros(Shape shape, bool requires_grad = false) {
        const auto [rows, cols] = storage_dims(shape);
        return BasicTensor(std::move(shape), Matrix::Zero(rows, cols)).set_requires_grad(requires_grad);
    }

    const Shape& shape() const { return node_->shape; }
    std::size_t rank() const { return node_->shape.size(); }
    std::size_t numel() const { return static_cast<std::size_t>(node_->value.size()); }
    std::size_t dim(std::size_t axis) const {
        if (axis >= rank()) throw DimensionError("axis " + std::to_string(axis) + " out of range for " + shape_string(shape()));
        return node_->shape[axis];
    }

    const Matrix& value() const { return node_->value; }
    // Direct value access for parameter updates; never use on a node inside a live graph.
    Matrix& mutable_value() { return node_->value; }

    std::span<const Scalar> data() const { return {node_->value.data(), numel()}; }

    Scalar item() const {
        if (numel() != 1) throw ContractError("item() on tensor of shape " + shape_string(shape()));
        return node_->value(0, 0);
    }
    Scalar operator[](std::size_t flat) const { return node_->value.data()[flat]; }
    Scalar at(std::size_t row, std::size_t col) const {
        return node_->value(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
    }

    bool requires_grad() const { return node_->requires_grad; }
    BasicTensor& set_requires_grad(bool on) {
        if (!node_->is_leaf() && !on) throw ContractError("cannot clear requires_grad on a non-leaf tensor");
        node_->requires_grad = on;
        return *this;
    }
    bool is_leaf() const { return node_->is_leaf(); }

    bool has_grad() const { return node_->grad.size() != 0; }
    // Gradient buffer; a zero matrix of the value's size when nothing has been accumulated.
    Matrix grad() const {
        if (has_grad()) return node_->grad;
        return Matrix::Zero(node_->value.rows(), node_->value.cols());
    }
    Matrix& mutable_grad() {
        if (!has_grad()) node_->grad = Matrix::Zero(node_->value.rows(), node_->value.cols());
        return node_->grad;
    }
    void zero_grad() { node_->grad.resize(0, 0); }

    // A new leaf sharing no graph history; values are copied.
    BasicTensor detach() const { return BasicTensor(shape(), value()); }

    std::string_view op() const { return node_->op; }
    const std::shared_ptr<Node>& node() const { return node_; }

 private:
    std::shared_ptr<Node> node_;
};

using Tensor = BasicTensor<double>;

namespace detail {

// Creates the output node of an operation. The gradient rule is recorded only
// when grad mode is on and at least one input requires a gradient.
template <typename Scalar, typename Fn>
BasicTensor<Scalar> make_result(Shape shape, MatrixX<Scalar> value, std::string_view op,
                                std::initializer_list<BasicTensor<Scalar>> inputs, Fn&& backward_fn) {
    BasicTensor<Scalar> out(std::move(shape), std::move(value));
    bool needs = false;
    if (GradMode::enabled()) {
        for (const auto& in : inputs) needs = needs || in.requires_grad();
    }
    auto& node = *out.node();
    node.op = op;
    if (needs) {
        node.requires_grad = true;
        for (const auto& in : inputs) node.inputs.push_back(in.node());
        node.backward_fn = std::forward<Fn>(backward_fn);
    }
    return out;
}

template <typename Scalar, typename Fn>
BasicTensor<Scalar> make_result(Shape shape, MatrixX<Scalar> value, std::string_view op,
                                const std::vector<BasicTensor<Scalar>>& inputs, Fn&& backward_fn) {
    BasicTensor<Scalar> out(std::move(shape), std::move(value));
    bool needs = false;
    if (GradMode::enabled()) {
        for (const auto& in : inputs) needs = needs || in.requires_grad();
    }
    auto& node = *out.node();
    node.op = op;
    if (needs) {
        node.requires_grad = true;
        node.inputs.reserve(inputs.size());
        for (const auto& in : inputs) node.inputs.push_back(in.node());
        node.backward_fn = std::forward<Fn>(backward_fn);
    }
    return out;
}

}  // namespace detail

// Topologically ordered record of the gradient-carrying nodes reachable from a
// root: every node appears after all of its inputs, and each node once.
template <typename Scalar>
class ComputationTape {
 public:
    using Node = detail::Node<Scalar>;

    explicit ComputationTape(const BasicTensor<Scalar>& root) {
        if (!root.requires_grad()) return;
        std::unordered_set<const Node*> seen;
        // Iterative post-order DFS; deep encoders would overflow a recursive walk.
        std::vector<std::pair<Node*, std::size_t>> stack;
        stack.emplace_back(root.node().get(), 0);
        seen.insert(root.node().get());
        while (!stack.empty()) {
            auto& [node, next] = stack.back();
            if (next < node->inputs.size()) {
                Node* child = node->inputs[next++].get();
                if (child->requires_grad && seen.insert(child).second) stack.emplace_back(child, 0);
            } else {
                nodes_.push_back(node);
                stack.pop_back();
            }
        }
    }

    const std::vector<Node*>& nodes() const { return nodes_; }
    std::size_t size() const { return nodes_.size(); }

    // Seeds the root (last node) with `seed` and runs every gradient rule once,
    // in reverse order. Leaf gradients accumulate across calls; interior
    // gradients are reset so a tape may be replayed.
    void backward(Scalar seed) {
        if (nodes_.empty()) return;
        for (Node* n : nodes_) {
            if (!n->is_leaf()) n->grad = MatrixX<Scalar>::Zero(n->value.rows(), n->value.cols());
        }
        Node* root = nodes_.back();
        if (root->is_leaf()) {
            root->accumulate(MatrixX<Scalar>::Constant(1, 1, seed));
            return;
        }
        root->grad(0, 0) = seed;
        for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
            Node* n = *it;
            if (!n->is_leaf() && n->backward_fn) n->backward_fn(*n);
        }
    }

 private:
    std::vector<Node*> nodes_;
};

// Populates grad of every requires_grad leaf reachable from `loss` with
// seed * d(loss)/d(leaf), adding to any gradient already present.
template <typename Scalar>
void backward(const BasicTensor<Scalar>& loss, Scalar seed = Scalar(1)) {
    if (loss.rank() != 0) {
        throw ContractError("backward() needs a scalar loss, got shape " + shape_string(loss.shape()));
    }
    if (!loss.requires_grad()) {
        throw ContractError("backward() on a loss that does not depend on any requires_grad tensor");
    }
    ComputationTape<Scalar>(loss).backward(seed);
}

}  // namespace lion
