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

#include "eesp/eru.hpp"

#include "eesp/errors.hpp"

namespace eesp {

std::size_t EruConfig::length() const {
  const std::size_t body = branches * branch_width;
  if (body == 0 || (4 * hidden_dim) % body != 0) {
    throw ConfigError("ERU: 4 * hidden_dim = " + std::to_string(4 * hidden_dim) +
                      " not divisible by K * d = " + std::to_string(body));
  }
  return 4 * hidden_dim / body;
}

std::size_t EruConfig::input_channels(std::size_t layer) const {
  const std::size_t in = layer == 0 ? embed_dim : hidden_dim;
  const std::size_t L = length();
  if (in % L != 0) {
    throw ConfigError("ERU: input width " + std::to_string(in) + " not divisible by L = " +
                      std::to_string(L));
  }
  return in / L;
}

std::size_t sequence_cap(std::size_t L) {
  const std::size_t odd = L % 2 == 1 ? L : L - 1;
  return std::max<std::size_t>(3, odd);
}

EespConfig EruConfig::eesp_config(std::size_t layer) const {
  EespConfig cfg;
  cfg.in_channels = input_channels(layer);
  cfg.out_channels = branches * branch_width;
  cfg.branches = branches;
  cfg.groups = groups;
  cfg.kernel = 3;
  cfg.variant = Variant::eesp;
  cfg.receptive_field_cap = sequence_cap(length());
  cfg.residual = false;
  cfg.spatial_rank = 1;
  return cfg;
}

void validate(const EruConfig& cfg) {
  if (cfg.embed_dim == 0 || cfg.hidden_dim == 0) throw ConfigError("ERU: empty dimensions");
  if (cfg.branches == 0) throw ConfigError("ERU: K must be >= 1");
  if (cfg.groups == 0) throw ConfigError("ERU: g must be >= 1");
  if (cfg.layers == 0) throw ConfigError("ERU: layers must be >= 1");
  for (std::size_t l = 0; l < std::min<std::size_t>(cfg.layers, 2); ++l) {
    validate(cfg.eesp_config(l));
  }
}

namespace {

ag::Var zero_leaf(Shape shape) { return ag::Var::leaf(Tensor(std::move(shape), 0.0)); }

}  // namespace

EruCell::EruCell(std::string name, const EruConfig& cfg, std::size_t layer, Rng rng)
    : name_(std::move(name)),
      cfg_((validate(cfg), cfg)),
      layer_(layer),
      input_dim_(layer == 0 ? cfg.embed_dim : cfg.hidden_dim),
      eesp_(name_ + ".eesp", cfg.eesp_config(layer), rng.split(1)),
      w_h_(ag::Var::leaf(he_init(cfg.hidden_dim, {4 * cfg.hidden_dim, cfg.hidden_dim},
                                 rng.split(2)))),
      bias_(zero_leaf({4 * cfg.hidden_dim})) {}

ag::Var EruCell::input_transform(const ag::Var& x, Mode mode) {
  return eesp_.forward(x, mode);
}

EruState EruCell::step(const ag::Var& x, const EruState& prev, Mode mode) {
  const std::size_t H = cfg_.hidden_dim;
  const Shape& xs = x.shape();
  if (xs.size() != 2 || xs[1] != input_dim_) {
    throw ShapeError(name_ + ": expected [N, " + std::to_string(input_dim_) + "] input, got " +
                     to_string(xs));
  }
  const std::size_t N = xs[0];
  if (prev.h.shape() != Shape{N, H} || prev.c.shape() != Shape{N, H}) {
    throw ShapeError(name_ + ": state must be [" + std::to_string(N) + ", " +
                     std::to_string(H) + "]");
  }
  const std::size_t L = cfg_.length();
  const ag::Var seq = ag::reshape(x, {N, input_dim_ / L, L});
  const ag::Var from_x = ag::reshape(eesp_.forward(seq, mode), {N, 4 * H});
  const ag::Var pre = ag::add(from_x, ag::linear(prev.h, w_h_, &bias_));

  const ag::Var i = ag::sigmoid(ag::slice_channels(pre, 0, H));
  const ag::Var f = ag::sigmoid(ag::slice_channels(pre, H, 2 * H));
  const ag::Var g = ag::tanh(ag::slice_channels(pre, 2 * H, 3 * H));
  const ag::Var o = ag::sigmoid(ag::slice_channels(pre, 3 * H, 4 * H));
  const ag::Var c = ag::add(ag::mul(f, prev.c), ag::mul(i, g));
  const ag::Var h = ag::mul(o, ag::tanh(c));
  return {h, c};
}

void EruCell::collect(ParameterList& out) const {
  eesp_.collect(out);
  out.push_back({name_ + ".recurrent.weight", w_h_});
  out.push_back({name_ + ".bias", bias_});
}

ParameterList EruCell::parameters() const {
  ParameterList out;
  collect(out);
  return out;
}

Eru::Eru(const EruConfig& cfg, Rng rng) : cfg_(cfg) {
  validate(cfg);
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    cells_.emplace_back("eru" + std::to_string(l), cfg, l, rng.split(l + 1));
  }
}

std::vector<EruState> Eru::initial_state(std::size_t batch) const {
  std::vector<EruState> s;
  for (std::size_t l = 0; l < cfg_.layers; ++l) {
    s.push_back({ag::Var::constant(Tensor({batch, cfg_.hidden_dim}, 0.0)),
                 ag::Var::constant(Tensor({batch, cfg_.hidden_dim}, 0.0))});
  }
  return s;
}

ag::Var Eru::step(const ag::Var& x, std::vector<EruState>& states, Mode mode) {
  if (states.size() != cells_.size()) throw ShapeError("ERU: one state per layer required");
  ag::Var in = x;
  for (std::size_t l = 0; l < cells_.size(); ++l) {
    states[l] = cells_[l].step(in, states[l], mode);
    in = states[l].h;
  }
  return in;
}

std::vector<ag::Var> Eru::unroll(const std::vector<ag::Var>& xs, std::vector<EruState>& states,
                                 Mode mode) {
  std::vector<ag::Var> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(step(x, states, mode));
  return out;
}

ParameterList Eru::parameters() const {
  ParameterList out;
  for (const auto& c : cells_) c.collect(out);
  return out;
}

std::uint64_t lstm_param_count(std::size_t E, std::size_t H) {
  return 4ull * H * (E + H) + 4ull * H;
}

std::uint64_t eru_layer_param_count(const EruConfig& cfg, std::size_t layer) {
  return parameter_elements(EruCell("count", cfg, layer, Rng(0)).parameters());
}

}  // namespace eesp
