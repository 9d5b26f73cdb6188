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

#include <cmath>
#include <concepts>
#include <span>
#include <string>
#include <vector>

#include "eesp/errors.hpp"
#include "eesp/rng.hpp"
#include "eesp/tensor.hpp"

namespace eesp {

enum class Mode { train, eval };

template <class G>
concept NormalSource = requires(G g) {
  { g.normal() } -> std::convertible_to<double>;
};

/// He (Kaiming) normal initialization: N(0, 2 / fan_in).
template <NormalSource G>
Tensor he_init(std::size_t fan_in, const Shape& shape, G gen) {
  if (fan_in == 0) throw ConfigError("he_init: fan_in must be >= 1");
  Tensor out(shape);
  const double std_dev = std::sqrt(2.0 / static_cast<double>(fan_in));
  for (auto& v : out.data()) v = std_dev * gen.normal();
  return out;
}

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);

/// Per-channel PReLU. `slopes` holds one value per channel, or a single
/// value shared by all channels (the only option for rank-1 input).
Tensor prelu(const Tensor& x, const Tensor& slopes);

struct PreluGrads {
  Tensor grad_x;
  Tensor grad_slopes;
};
PreluGrads prelu_backward(const Tensor& x, const Tensor& slopes, const Tensor& grad_out);

Tensor concat_channels(std::span<const Tensor> parts);
/// Channels [begin, end) of x.
Tensor slice_channels(const Tensor& x, std::size_t begin, std::size_t end);

struct BatchNormState {
  explicit BatchNormState(std::size_t channels, double eps = 1e-5, double momentum = 0.1);
  Tensor running_mean;
  Tensor running_var;
  double eps;
  double momentum;
};

/// Values saved by the forward pass that the backward pass needs.
struct BatchNormCache {
  Tensor x_hat;
  std::vector<double> inv_std;
  Mode mode = Mode::eval;
};

/// Train mode normalizes with batch statistics and updates the running
/// statistics in `state`; eval mode uses the running statistics.
Tensor batch_norm(const Tensor& x, const Tensor& scale, const Tensor& shift,
                  BatchNormState& state, Mode mode, BatchNormCache* cache = nullptr);

struct BatchNormGrads {
  Tensor grad_x;
  Tensor grad_scale;
  Tensor grad_shift;
};
BatchNormGrads batch_norm_backward(const Tensor& grad_out, const Tensor& scale,
                                   const BatchNormCache& cache);

/// k x k average pooling with zero padding; the divisor is always k*k.
Tensor avg_pool2d(const Tensor& x, std::size_t kernel = 3, std::size_t stride = 2,
                  std::size_t padding = 1);
Tensor avg_pool2d_backward(const Shape& input_shape, const Tensor& grad_out,
                           std::size_t kernel = 3, std::size_t stride = 2,
                           std::size_t padding = 1);

/// [N, C, ...] -> [N, C]
Tensor global_avg_pool(const Tensor& x);

}  // namespace eesp
