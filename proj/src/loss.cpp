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

#include "eesp/loss.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "eesp/errors.hpp"

namespace eesp {

namespace {

void require_matrix(const Tensor& t, const char* who) {
  if (t.rank() != 2) {
    throw ShapeError(std::string(who) + " expects [N, C] logits, got " + to_string(t.shape()));
  }
}

}  // namespace

Tensor softmax(const Tensor& logits) {
  require_matrix(logits, "softmax");
  const std::size_t N = logits.dim(0), C = logits.dim(1);
  Tensor out(logits.shape());
  for (std::size_t n = 0; n < N; ++n) {
    const double* row = logits.data().data() + n * C;
    const double mx = *std::max_element(row, row + C);
    double z = 0.0;
    for (std::size_t c = 0; c < C; ++c) {
      out[n * C + c] = std::exp(row[c] - mx);
      z += out[n * C + c];
    }
    for (std::size_t c = 0; c < C; ++c) out[n * C + c] /= z;
  }
  return out;
}

LossResult cross_entropy(const Tensor& logits, std::span<const int> labels) {
  require_matrix(logits, "cross_entropy");
  const std::size_t N = logits.dim(0), C = logits.dim(1);
  if (labels.size() != N) {
    throw ShapeError("cross_entropy: " + std::to_string(labels.size()) + " labels for batch " +
                     std::to_string(N));
  }
  LossResult r{0.0, softmax(logits)};
  const double inv_n = 1.0 / static_cast<double>(N);
  for (std::size_t n = 0; n < N; ++n) {
    const int y = labels[n];
    if (y < 0 || static_cast<std::size_t>(y) >= C) {
      throw std::out_of_range("cross_entropy: label " + std::to_string(y) +
                              " outside [0, " + std::to_string(C) + ")");
    }
    // log-sum-exp form keeps large margins finite.
    const double* row = logits.data().data() + n * C;
    const double mx = *std::max_element(row, row + C);
    double z = 0.0;
    for (std::size_t c = 0; c < C; ++c) z += std::exp(row[c] - mx);
    r.loss += (mx + std::log(z) - row[y]) * inv_n;
    for (std::size_t c = 0; c < C; ++c) {
      double& g = r.grad_logits[n * C + c];
      g = (g - (static_cast<std::size_t>(y) == c ? 1.0 : 0.0)) * inv_n;
    }
  }
  return r;
}

LossResult binary_cross_entropy(const Tensor& logits, const Tensor& targets) {
  if (!logits.same_shape(targets)) {
    throw ShapeError("binary_cross_entropy: logits " + to_string(logits.shape()) +
                     " vs targets " + to_string(targets.shape()));
  }
  LossResult r{0.0, Tensor(logits.shape())};
  const double inv = 1.0 / static_cast<double>(logits.numel());
  for (std::size_t i = 0; i < logits.numel(); ++i) {
    const double x = logits[i], t = targets[i];
    // max(x,0) - x t + log(1 + exp(-|x|))
    r.loss += (std::max(x, 0.0) - x * t + std::log1p(std::exp(-std::abs(x)))) * inv;
    const double p = 1.0 / (1.0 + std::exp(-x));
    r.grad_logits[i] = (p - t) * inv;
  }
  return r;
}

}  // namespace eesp
