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

#include <cstdint>
#include <functional>
#include <vector>

#include "eesp/autograd.hpp"
#include "eesp/conv.hpp"

namespace eesp::oracle {

/// Textbook nested-loop convolution, sharing nothing with the library's
/// kernels beyond the ConvSpec fields. Counts every multiply-add, padded taps
/// included, into *macs when given (per whole batch).
Tensor naive_conv(const ConvSpec& spec, const Tensor& weights, const Tensor* bias,
                  const Tensor& x, std::uint64_t* macs = nullptr);

/// Random tensor with N(0, 1) entries.
Tensor random_tensor(const Shape& shape, Rng& rng);

/// ||a - b|| / max(||a||, ||b||), 0 when both vanish.
double relative_error(const Tensor& a, const Tensor& b);

struct GradCheck {
  double rel_error = 0;
  std::size_t checked = 0;  // elements perturbed
  Tensor analytic;          // gradient restricted to the checked elements
  Tensor numeric;
};

/// Central differences of loss() with respect to `wrt`, compared to the
/// reverse-mode gradient. `loss` must rebuild the graph on every call and
/// return a single-element Var. At most `max_elements` entries (chosen
/// deterministically from `seed`) are perturbed.
GradCheck check_gradient(const std::function<ag::Var()>& loss, ag::Var& wrt,
                         double step = 1e-5, std::size_t max_elements = 64,
                         std::uint64_t seed = 1);

/// Fixed random projection sum(out * w) turning any output into a scalar.
ag::Var random_projection(const ag::Var& out, std::uint64_t seed);

}  // namespace eesp::oracle
