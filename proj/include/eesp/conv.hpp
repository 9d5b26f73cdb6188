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
#include <optional>
#include <string>
#include <utility>

#include "eesp/rng.hpp"
#include "eesp/tensor.hpp"

namespace eesp {

enum class ConvKind { standard, group, depthwise, depthwise_dilated, pointwise };

std::string to_string(ConvKind kind);

/// Declarative description of one convolution. `spatial_rank` selects 2D
/// (N,C,H,W input, n x n kernel) or 1D (N,C,L input, length-n kernel).
struct ConvSpec {
  ConvKind kind = ConvKind::standard;
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::size_t kernel = 1;
  std::size_t stride = 1;
  std::size_t dilation = 1;
  std::size_t groups = 1;
  std::size_t padding = 0;
  bool has_bias = false;
  std::size_t spatial_rank = 2;

  // Factories apply "same" padding, dilation * (kernel - 1) / 2.
  static ConvSpec standard(std::size_t c, std::size_t c_out, std::size_t n,
                           std::size_t stride = 1, std::size_t dilation = 1);
  static ConvSpec group(std::size_t c, std::size_t c_out, std::size_t n, std::size_t groups,
                        std::size_t stride = 1, std::size_t dilation = 1);
  static ConvSpec depthwise(std::size_t c, std::size_t n, std::size_t stride = 1);
  static ConvSpec depthwise_dilated(std::size_t c, std::size_t n, std::size_t dilation,
                                    std::size_t stride = 1);
  static ConvSpec pointwise(std::size_t c, std::size_t c_out);

  ConvSpec with_rank(std::size_t rank) const;
  ConvSpec with_bias(bool bias = true) const;

  std::size_t effective_kernel() const { return (kernel - 1) * dilation + 1; }
  std::size_t fan_in() const;
  Shape weight_shape() const;

  bool operator==(const ConvSpec&) const = default;
};

/// Throws SpecError when the kind-specific invariants do not hold.
void validate(const ConvSpec& spec);

/// Weight parameters only (n^rank * c * c_out / g).
std::uint64_t weight_count(const ConvSpec& spec);
/// Weights plus c_out bias terms when the spec has a bias.
std::uint64_t param_count(const ConvSpec& spec);
/// Multiply-adds for one image: weight_count * out_h * out_w.
std::uint64_t mac_count(const ConvSpec& spec, std::size_t out_h, std::size_t out_w);

/// Depth-wise (optionally dilated) convolution followed by a point-wise one.
struct SeparableSpec {
  ConvSpec depthwise;
  ConvSpec pointwise;

  static SeparableSpec make(std::size_t n, std::size_t c, std::size_t c_out,
                            std::size_t dilation = 1, std::size_t stride = 1);
};

std::uint64_t param_count(const SeparableSpec& spec);
std::uint64_t mac_count(const SeparableSpec& spec, std::size_t out_h, std::size_t out_w);

/// (n - 1) * r + 1; n must be odd.
std::size_t effective_receptive_field(std::size_t n, std::size_t r);

struct Ratio {
  std::uint64_t num = 0;
  std::uint64_t den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

/// n^2 c c_out / (n^2 c + c c_out)
Ratio cost_reduction_separable(std::size_t n, std::size_t c, std::size_t c_out);

/// Output extents (h, w) for an input of (in_h, in_w). For 1D specs in_h is
/// ignored and the returned height is 1.
std::pair<std::size_t, std::size_t> output_extent(const ConvSpec& spec, std::size_t in_h,
                                                  std::size_t in_w);

struct ConvLayer {
  ConvSpec spec;
  Tensor weights;
  std::optional<Tensor> bias;
};

/// He-initialized weights, zero bias.
ConvLayer make_conv_layer(const ConvSpec& spec, Rng rng);

/// im2col + GEMM path.
Tensor conv_forward(const ConvSpec& spec, const Tensor& weights, const Tensor* bias,
                    const Tensor& x);
Tensor conv_forward(const ConvLayer& layer, const Tensor& x);

/// Direct loop nest over the output; the reference path for conv_forward.
Tensor conv_forward_direct(const ConvLayer& layer, const Tensor& x);

struct ConvGrads {
  Tensor grad_x;
  Tensor grad_w;
  std::optional<Tensor> grad_b;
};

ConvGrads conv_backward(const ConvSpec& spec, const Tensor& weights, bool has_bias,
                        const Tensor& x, const Tensor& grad_out);
ConvGrads conv_backward(const ConvLayer& layer, const Tensor& x, const Tensor& grad_out);

}  // namespace eesp
