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

#include "eesp/autograd.hpp"

#include <cmath>
#include <unordered_set>

#include "eesp/errors.hpp"
#include "eesp/loss.hpp"

namespace eesp::ag {

namespace {

void accumulate(Node& node, const Tensor& g) {
  if (!node.requires_grad) return;
  if (node.grad.empty()) {
    node.grad = g;
    return;
  }
  auto dst = node.grad.data();
  auto src = g.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

Var make(Tensor value, std::vector<Var> parents, std::function<void(Node&)> fn) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  for (const Var& p : parents) node->requires_grad = node->requires_grad || p.requires_grad();
  if (node->requires_grad) {
    for (const Var& p : parents) node->parents.push_back(p.node());
    node->backward = std::move(fn);
  }
  return Var::from_node(std::move(node));
}

Node& parent(Node& n, std::size_t i) { return *n.parents[i]; }

}  // namespace

Var Var::constant(Tensor value) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  return from_node(std::move(node));
}

Var Var::leaf(Tensor value) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->requires_grad = true;
  return from_node(std::move(node));
}

Var Var::from_node(std::shared_ptr<Node> node) {
  Var v;
  v.node_ = std::move(node);
  return v;
}

Tensor Var::grad() const {
  if (node_->grad.empty()) return Tensor(node_->value.shape());
  return node_->grad;
}

void backward(const Var& root) {
  if (root.value().numel() != 1) {
    throw ShapeError("backward() without a seed needs a single-element root, got " +
                     to_string(root.shape()));
  }
  backward(root, Tensor(root.shape(), 1.0));
}

void backward(const Var& root, const Tensor& seed) {
  if (!seed.same_shape(root.value())) throw ShapeError("backward: seed shape mismatch");
  if (!root.requires_grad()) return;

  // Iterative post-order DFS gives a topological order.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{root.node().get(), 0}};
  seen.insert(root.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next++].get();
      if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  accumulate(*root.node(), seed);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* node = *it;
    if (!node->backward || node->grad.empty()) continue;
    node->backward(*node);
    // Interior gradients are not needed once propagated.
    node->grad = Tensor();
  }
}

Var add(const Var& a, const Var& b) {
  return make(eesp::add(a.value(), b.value()), {a, b}, [](Node& n) {
    accumulate(parent(n, 0), n.grad);
    accumulate(parent(n, 1), n.grad);
  });
}

Var sub(const Var& a, const Var& b) {
  return make(eesp::sub(a.value(), b.value()), {a, b}, [](Node& n) {
    accumulate(parent(n, 0), n.grad);
    accumulate(parent(n, 1), eesp::scale(n.grad, -1.0));
  });
}

Var mul(const Var& a, const Var& b) {
  return make(eesp::mul(a.value(), b.value()), {a, b}, [](Node& n) {
    Node& pa = parent(n, 0);
    Node& pb = parent(n, 1);
    if (pa.requires_grad) accumulate(pa, eesp::mul(n.grad, pb.value));
    if (pb.requires_grad) accumulate(pb, eesp::mul(n.grad, pa.value));
  });
}

Var scale(const Var& a, double s) {
  return make(eesp::scale(a.value(), s), {a},
              [s](Node& n) { accumulate(parent(n, 0), eesp::scale(n.grad, s)); });
}

Var one_minus(const Var& a) {
  Tensor out = a.value();
  for (auto& v : out.data()) v = 1.0 - v;
  return make(std::move(out), {a},
              [](Node& n) { accumulate(parent(n, 0), eesp::scale(n.grad, -1.0)); });
}

Var prelu(const Var& x, const Var& slopes) {
  return make(eesp::prelu(x.value(), slopes.value()), {x, slopes}, [](Node& n) {
    PreluGrads g = prelu_backward(parent(n, 0).value, parent(n, 1).value, n.grad);
    accumulate(parent(n, 0), g.grad_x);
    accumulate(parent(n, 1), g.grad_slopes);
  });
}

Var sigmoid(const Var& x) {
  Tensor out(x.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = 1.0 / (1.0 + std::exp(-x.value()[i]));
  return make(std::move(out), {x}, [](Node& n) {
    Tensor g(n.value.shape());
    for (std::size_t i = 0; i < g.numel(); ++i) {
      g[i] = n.grad[i] * n.value[i] * (1.0 - n.value[i]);
    }
    accumulate(parent(n, 0), g);
  });
}

Var tanh(const Var& x) {
  Tensor out(x.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = std::tanh(x.value()[i]);
  return make(std::move(out), {x}, [](Node& n) {
    Tensor g(n.value.shape());
    for (std::size_t i = 0; i < g.numel(); ++i) {
      g[i] = n.grad[i] * (1.0 - n.value[i] * n.value[i]);
    }
    accumulate(parent(n, 0), g);
  });
}

Var conv(const Var& x, const Var& weights, const Var* bias, const ConvSpec& spec) {
  Tensor out = conv_forward(spec, weights.value(), bias ? &bias->value() : nullptr, x.value());
  std::vector<Var> parents{x, weights};
  if (bias) parents.push_back(*bias);
  const bool has_bias = bias != nullptr;
  return make(std::move(out), parents, [spec, has_bias](Node& n) {
    ConvGrads g =
        conv_backward(spec, parent(n, 1).value, has_bias, parent(n, 0).value, n.grad);
    accumulate(parent(n, 0), g.grad_x);
    accumulate(parent(n, 1), g.grad_w);
    if (has_bias) accumulate(parent(n, 2), *g.grad_b);
  });
}

Var batch_norm(const Var& x, const Var& scale, const Var& shift, BatchNormState& state,
               Mode mode) {
  auto cache = std::make_shared<BatchNormCache>();
  Tensor out = eesp::batch_norm(x.value(), scale.value(), shift.value(), state, mode, cache.get());
  return make(std::move(out), {x, scale, shift}, [cache](Node& n) {
    BatchNormGrads g = batch_norm_backward(n.grad, parent(n, 1).value, *cache);
    accumulate(parent(n, 0), g.grad_x);
    accumulate(parent(n, 1), g.grad_scale);
    accumulate(parent(n, 2), g.grad_shift);
  });
}

Var concat_channels(std::span<const Var> parts) {
  std::vector<Tensor> values;
  values.reserve(parts.size());
  for (const Var& p : parts) values.push_back(p.value());
  Tensor out = eesp::concat_channels(values);
  return make(std::move(out), std::vector<Var>(parts.begin(), parts.end()), [](Node& n) {
    std::size_t begin = 0;
    for (auto& p : n.parents) {
      const std::size_t c = p->value.channels();
      if (p->requires_grad) accumulate(*p, eesp::slice_channels(n.grad, begin, begin + c));
      begin += c;
    }
  });
}

Var slice_channels(const Var& x, std::size_t begin, std::size_t end) {
  return make(eesp::slice_channels(x.value(), begin, end), {x}, [begin, end](Node& n) {
    Node& p = parent(n, 0);
    Tensor g(p.value.shape());
    const std::size_t inner = g.spatial_size();
    const std::size_t C = g.channels();
    const std::size_t width = (end - begin) * inner;
    for (std::size_t b = 0; b < g.dim(0); ++b) {
      std::copy_n(n.grad.data().data() + b * width, width,
                  g.data().data() + (b * C + begin) * inner);
    }
    accumulate(p, g);
  });
}

Var avg_pool2d(const Var& x, std::size_t kernel, std::size_t stride, std::size_t padding) {
  return make(eesp::avg_pool2d(x.value(), kernel, stride, padding), {x},
              [kernel, stride, padding](Node& n) {
                Node& p = parent(n, 0);
                accumulate(p, avg_pool2d_backward(p.value.shape(), n.grad, kernel, stride,
                                                  padding));
              });
}

Var global_avg_pool(const Var& x) {
  return make(eesp::global_avg_pool(x.value()), {x}, [](Node& n) {
    Node& p = parent(n, 0);
    Tensor g(p.value.shape());
    const std::size_t S = g.spatial_size();
    const double inv = 1.0 / static_cast<double>(S);
    for (std::size_t i = 0; i < n.grad.numel(); ++i) {
      for (std::size_t s = 0; s < S; ++s) g[i * S + s] = n.grad[i] * inv;
    }
    accumulate(p, g);
  });
}

Var reshape(const Var& x, Shape shape) {
  return make(x.value().reshaped(std::move(shape)), {x}, [](Node& n) {
    Node& p = parent(n, 0);
    accumulate(p, n.grad.reshaped(p.value.shape()));
  });
}

Var linear(const Var& x, const Var& weights, const Var* bias) {
  const Tensor& X = x.value();
  const Tensor& W = weights.value();
  if (X.rank() != 2 || W.rank() != 2 || X.dim(1) != W.dim(1)) {
    throw ShapeError("linear: input " + to_string(X.shape()) + " vs weights " +
                     to_string(W.shape()));
  }
  const std::size_t N = X.dim(0), F = X.dim(1), O = W.dim(0);
  if (bias && bias->value().numel() != O) throw ShapeError("linear: bias size mismatch");
  Tensor out({N, O});
  for (std::size_t n = 0; n < N; ++n) {
    for (std::size_t o = 0; o < O; ++o) {
      double acc = bias ? bias->value()[o] : 0.0;
      for (std::size_t f = 0; f < F; ++f) acc += X[n * F + f] * W[o * F + f];
      out[n * O + o] = acc;
    }
  }
  std::vector<Var> parents{x, weights};
  if (bias) parents.push_back(*bias);
  const bool has_bias = bias != nullptr;
  return make(std::move(out), parents, [N, F, O, has_bias](Node& n) {
    Node& px = parent(n, 0);
    Node& pw = parent(n, 1);
    if (px.requires_grad) {
      Tensor gx(px.value.shape());
      for (std::size_t b = 0; b < N; ++b)
        for (std::size_t o = 0; o < O; ++o) {
          const double g = n.grad[b * O + o];
          for (std::size_t f = 0; f < F; ++f) gx[b * F + f] += g * pw.value[o * F + f];
        }
      accumulate(px, gx);
    }
    if (pw.requires_grad) {
      Tensor gw(pw.value.shape());
      for (std::size_t b = 0; b < N; ++b)
        for (std::size_t o = 0; o < O; ++o) {
          const double g = n.grad[b * O + o];
          for (std::size_t f = 0; f < F; ++f) gw[o * F + f] += g * px.value[b * F + f];
        }
      accumulate(pw, gw);
    }
    if (has_bias) {
      Tensor gb({O});
      for (std::size_t b = 0; b < N; ++b)
        for (std::size_t o = 0; o < O; ++o) gb[o] += n.grad[b * O + o];
      accumulate(parent(n, 2), gb);
    }
  });
}

Var weighted_sum(const Var& x, const Tensor& weights) {
  if (!x.value().same_shape(weights)) throw ShapeError("weighted_sum: shape mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < weights.numel(); ++i) s += x.value()[i] * weights[i];
  return make(Tensor({1}, {s}), {x},
              [weights](Node& n) { accumulate(parent(n, 0), eesp::scale(weights, n.grad[0])); });
}

Var cross_entropy(const Var& logits, std::span<const int> labels) {
  LossResult r = eesp::cross_entropy(logits.value(), labels);
  auto grad = std::make_shared<Tensor>(std::move(r.grad_logits));
  return make(Tensor({1}, {r.loss}), {logits},
              [grad](Node& n) { accumulate(parent(n, 0), eesp::scale(*grad, n.grad[0])); });
}

Var binary_cross_entropy(const Var& logits, const Tensor& targets) {
  LossResult r = eesp::binary_cross_entropy(logits.value(), targets);
  auto grad = std::make_shared<Tensor>(std::move(r.grad_logits));
  return make(Tensor({1}, {r.loss}), {logits},
              [grad](Node& n) { accumulate(parent(n, 0), eesp::scale(*grad, n.grad[0])); });
}

}  // namespace eesp::ag
