// Copyright 2026 The EESPNet Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "eesp/conv.hpp"
#include "eesp/tensor.hpp"
#include "eesp/tensor_ops.hpp"

// Reverse-mode differentiation over the tensor kernels. Each op records its
// inputs and a closure that turns the output gradient into input gradients
// via the explicit *_backward kernels.
namespace eesp::ag {

struct Node {
  Tensor value;
  Tensor grad;  // empty until something flows into it
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;
};

class Var {
 public:
  Var() = default;

  /// Input that gradients do not flow into.
  static Var constant(Tensor value);
  /// Trainable leaf; accumulates gradient.
  static Var leaf(Tensor value);

  bool defined() const { return static_cast<bool>(node_); }
  const Tensor& value() const { return node_->value; }
  const Shape& shape() const { return node_->value.shape(); }
  bool requires_grad() const { return node_ && node_->requires_grad; }

  /// Accumulated gradient, or zeros if none reached this node.
  Tensor grad() const;
  void zero_grad() { node_->grad = Tensor(); }
  /// In-place access for optimizers and tests that perturb parameters.
  Tensor& mutable_value() { return node_->value; }

  const std::shared_ptr<Node>& node() const { return node_; }
  static Var from_node(std::shared_ptr<Node> node);

 private:
  std::shared_ptr<Node> node_;
};

/// Seeds d(root)/d(root) = 1 (root must hold one element) and propagates.
void backward(const Var& root);
void backward(const Var& root, const Tensor& seed);

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double s);
/// 1 - a, elementwise.
Var one_minus(const Var& a);
Var prelu(const Var& x, const Var& slopes);
Var sigmoid(const Var& x);
Var tanh(const Var& x);

Var conv(const Var& x, const Var& weights, const Var* bias, const ConvSpec& spec);
Var batch_norm(const Var& x, const Var& scale, const Var& shift, BatchNormState& state,
               Mode mode);
Var concat_channels(std::span<const Var> parts);
Var slice_channels(const Var& x, std::size_t begin, std::size_t end);
Var avg_pool2d(const Var& x, std::size_t kernel = 3, std::size_t stride = 2,
               std::size_t padding = 1);
Var global_avg_pool(const Var& x);
Var reshape(const Var& x, Shape shape);
/// x: [N, F], weights: [O, F], bias: [O] -> [N, O]
Var linear(const Var& x, const Var& weights, const Var* bias);

/// Sum of all elements weighted by a constant tensor of the same shape.
Var weighted_sum(const Var& x, const Tensor& weights);
Var cross_entropy(const Var& logits, std::span<const int> labels);
Var binary_cross_entropy(const Var& logits, const Tensor& targets);

}  // namespace eesp::ag
