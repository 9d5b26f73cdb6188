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

#include <span>

#include "eesp/tensor.hpp"

namespace eesp {

struct LossResult {
  double loss = 0.0;
  Tensor grad_logits;
};

/// Mean softmax cross-entropy over the batch. logits: [N, C], labels in [0, C).
/// grad_logits = (softmax - onehot) / N.
LossResult cross_entropy(const Tensor& logits, std::span<const int> labels);

/// Mean sigmoid binary cross-entropy over all N*C entries; targets in {0, 1}
/// with the same shape as logits.
LossResult binary_cross_entropy(const Tensor& logits, const Tensor& targets);

/// Row-wise softmax of [N, C] logits.
Tensor softmax(const Tensor& logits);

}  // namespace eesp
