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
#include <vector>

#include "eesp/autograd.hpp"
#include "eesp/conv.hpp"

namespace eesp {

struct Parameter {
  std::string name;
  ag::Var var;
};
using ParameterList = std::vector<Parameter>;

/// One row of a cost ledger.
struct LayerRecord {
  std::string name;
  std::string type;
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel = 1;
  std::size_t stride = 1;
  std::size_t groups = 1;
  std::vector<std::size_t> dilations;
  std::size_t out_h = 1;
  std::size_t out_w = 1;
  std::uint64_t params = 0;  // weights only
  std::uint64_t bias_params = 0;
  std::uint64_t macs = 0;
  bool classifier = false;
};

LayerRecord conv_record(const std::string& name, const ConvSpec& spec, std::size_t out_h,
                        std::size_t out_w);

/// Per-channel PReLU slopes start at this value.
inline constexpr double kPreluInit = 0.25;

/// Convolution with optional batch norm and PReLU after it.
class ConvUnit {
 public:
  enum class Post { none, bn, bn_prelu };

  ConvUnit(std::string name, const ConvSpec& spec, Post post, Rng rng);

  ag::Var forward(const ag::Var& x, Mode mode);

  const std::string& name() const { return name_; }
  const ConvSpec& spec() const { return spec_; }
  Post post() const { return post_; }

  ag::Var& weights() { return weights_; }
  const ag::Var& weights() const { return weights_; }
  ag::Var* bias() { return bias_ ? &*bias_ : nullptr; }
  ag::Var* bn_scale() { return bn_scale_ ? &*bn_scale_ : nullptr; }
  ag::Var* bn_shift() { return bn_shift_ ? &*bn_shift_ : nullptr; }
  ag::Var* prelu_slopes() { return slopes_ ? &*slopes_ : nullptr; }
  BatchNormState* bn_state() { return bn_state_ ? &*bn_state_ : nullptr; }

  /// Snapshot of the convolution alone.
  ConvLayer layer() const;
  void collect(ParameterList& out) const;
  /// Batch-norm and PReLU parameters (not part of the convolution ledger).
  std::uint64_t affine_params() const;

 private:
  std::string name_;
  ConvSpec spec_;
  Post post_;
  ag::Var weights_;
  std::optional<ag::Var> bias_;
  std::optional<ag::Var> bn_scale_, bn_shift_, slopes_;
  std::optional<BatchNormState> bn_state_;
};

/// Fully connected layer, weights [out, in].
class Linear {
 public:
  Linear(std::string name, std::size_t in, std::size_t out, bool bias, Rng rng);

  ag::Var forward(const ag::Var& x) const;
  std::size_t in_features() const { return in_; }
  std::size_t out_features() const { return out_; }
  ag::Var& weights() { return weights_; }
  ag::Var* bias() { return bias_ ? &*bias_ : nullptr; }
  void collect(ParameterList& out) const;
  LayerRecord record() const;

 private:
  std::string name_;
  std::size_t in_, out_;
  ag::Var weights_;
  std::optional<ag::Var> bias_;
};

/// Learnable per-channel PReLU without a preceding convolution.
class PRelu {
 public:
  PRelu(std::string name, std::size_t channels);
  ag::Var forward(const ag::Var& x) const { return ag::prelu(x, slopes_); }
  ag::Var& slopes() { return slopes_; }
  void collect(ParameterList& out) const { out.push_back({name_, slopes_}); }

 private:
  std::string name_;
  ag::Var slopes_;
};

std::uint64_t parameter_elements(const ParameterList& params);

}  // namespace eesp
