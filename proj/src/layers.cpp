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

#include "eesp/layers.hpp"

namespace eesp {

LayerRecord conv_record(const std::string& name, const ConvSpec& spec, std::size_t out_h,
                        std::size_t out_w) {
  LayerRecord r;
  r.name = name;
  r.type = to_string(spec.kind);
  r.in_channels = spec.in_channels;
  r.out_channels = spec.out_channels;
  r.kernel = spec.kernel;
  r.stride = spec.stride;
  r.groups = spec.groups;
  r.dilations = {spec.dilation};
  r.out_h = out_h;
  r.out_w = out_w;
  r.params = weight_count(spec);
  r.bias_params = spec.has_bias ? spec.out_channels : 0;
  r.macs = mac_count(spec, out_h, out_w);
  return r;
}

ConvUnit::ConvUnit(std::string name, const ConvSpec& spec, Post post, Rng rng)
    : name_(std::move(name)), spec_(spec), post_(post) {
  ConvLayer layer = make_conv_layer(spec, rng);
  weights_ = ag::Var::leaf(std::move(layer.weights));
  if (layer.bias) bias_ = ag::Var::leaf(std::move(*layer.bias));
  const std::size_t c = spec.out_channels;
  if (post != Post::none) {
    bn_scale_ = ag::Var::leaf(Tensor({c}, 1.0));
    bn_shift_ = ag::Var::leaf(Tensor({c}, 0.0));
    bn_state_.emplace(c);
  }
  if (post == Post::bn_prelu) slopes_ = ag::Var::leaf(Tensor({c}, kPreluInit));
}

ag::Var ConvUnit::forward(const ag::Var& x, Mode mode) {
  ag::Var y = ag::conv(x, weights_, bias_ ? &*bias_ : nullptr, spec_);
  if (post_ != Post::none) y = ag::batch_norm(y, *bn_scale_, *bn_shift_, *bn_state_, mode);
  if (post_ == Post::bn_prelu) y = ag::prelu(y, *slopes_);
  return y;
}

ConvLayer ConvUnit::layer() const {
  ConvLayer l{spec_, weights_.value(), std::nullopt};
  if (bias_) l.bias = bias_->value();
  return l;
}

void ConvUnit::collect(ParameterList& out) const {
  out.push_back({name_ + ".weight", weights_});
  if (bias_) out.push_back({name_ + ".bias", *bias_});
  if (bn_scale_) {
    out.push_back({name_ + ".bn.scale", *bn_scale_});
    out.push_back({name_ + ".bn.shift", *bn_shift_});
  }
  if (slopes_) out.push_back({name_ + ".prelu", *slopes_});
}

std::uint64_t ConvUnit::affine_params() const {
  std::uint64_t n = 0;
  if (bn_scale_) n += 2 * spec_.out_channels;
  if (slopes_) n += spec_.out_channels;
  return n;
}

Linear::Linear(std::string name, std::size_t in, std::size_t out, bool bias, Rng rng)
    : name_(std::move(name)), in_(in), out_(out) {
  weights_ = ag::Var::leaf(he_init(in, {out, in}, rng));
  if (bias) bias_ = ag::Var::leaf(Tensor({out}));
}

ag::Var Linear::forward(const ag::Var& x) const {
  return ag::linear(x, weights_, bias_ ? &*bias_ : nullptr);
}

void Linear::collect(ParameterList& out) const {
  out.push_back({name_ + ".weight", weights_});
  if (bias_) out.push_back({name_ + ".bias", *bias_});
}

LayerRecord Linear::record() const {
  LayerRecord r;
  r.name = name_;
  r.type = "fully_connected";
  r.in_channels = in_;
  r.out_channels = out_;
  r.params = std::uint64_t{in_} * out_;
  r.bias_params = bias_ ? out_ : 0;
  r.macs = std::uint64_t{in_} * out_;
  r.classifier = true;
  return r;
}

PRelu::PRelu(std::string name, std::size_t channels)
    : name_(std::move(name)), slopes_(ag::Var::leaf(Tensor({channels}, kPreluInit))) {}

std::uint64_t parameter_elements(const ParameterList& params) {
  std::uint64_t n = 0;
  for (const auto& p : params) n += p.var.value().numel();
  return n;
}

}  // namespace eesp
