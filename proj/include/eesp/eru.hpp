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
#include <string>
#include <vector>

#include "eesp/eesp_unit.hpp"

namespace eesp {

/// Recurrent unit whose input transform is a 1D EESP unit.
///
/// The input vector x_t (embed_dim) is laid out as [C, L] and passed through
/// a stride-1 EESP unit with K branches of width d, producing [K d, L] =
/// 4 * hidden_dim gate pre-activations. L = 4 H / (K d), C = E / L.
struct EruConfig {
  std::size_t embed_dim = 400;
  std::size_t hidden_dim = 400;
  std::size_t branches = 4;       // K
  std::size_t groups = 4;         // g
  std::size_t branch_width = 40;  // d
  std::size_t layers = 1;

  /// Sequence length L of the 1D arrangement.
  std::size_t length() const;
  /// Channels C of layer `layer`'s input (embed_dim for layer 0, hidden_dim after).
  std::size_t input_channels(std::size_t layer) const;
  /// The 1D EESP unit used by `layer`.
  EespConfig eesp_config(std::size_t layer) const;
};

/// Throws ConfigError on divisibility or range violations.
void validate(const EruConfig& cfg);

/// Receptive cap for a 1D map of length L: largest odd field <= L, at least 3.
std::size_t sequence_cap(std::size_t L);

struct EruState {
  ag::Var h;  // [N, H]
  ag::Var c;  // [N, H]
};

/// One layer. Gates in order i, f, g, o:
///   pre = reshape(eesp1d(reshape(x, [N, C, L])), [N, 4H]) + h W^T + b
///   c'  = sigmoid(f) * c + sigmoid(i) * tanh(g)
///   h'  = sigmoid(o) * tanh(c')
class EruCell {
 public:
  EruCell(std::string name, const EruConfig& cfg, std::size_t layer, Rng rng);

  EruState step(const ag::Var& x, const EruState& prev, Mode mode = Mode::eval);
  /// The 1D EESP input transform alone: [N, C, L] -> [N, K d, L].
  ag::Var input_transform(const ag::Var& x, Mode mode = Mode::eval);

  EespUnit& eesp() { return eesp_; }
  ag::Var& recurrent_weights() { return w_h_; }  // [4H, H]
  ag::Var& bias() { return bias_; }              // [4H]
  std::size_t input_dim() const { return input_dim_; }

  void collect(ParameterList& out) const;
  ParameterList parameters() const;

 private:
  std::string name_;
  EruConfig cfg_;
  std::size_t layer_;
  std::size_t input_dim_;
  EespUnit eesp_;
  ag::Var w_h_;
  ag::Var bias_;
};

/// Stack of cfg.layers cells; layer l+1 consumes layer l's h.
class Eru {
 public:
  Eru(const EruConfig& cfg, Rng rng);

  std::vector<EruState> initial_state(std::size_t batch) const;
  /// One time step through every layer; returns the top layer's h.
  ag::Var step(const ag::Var& x, std::vector<EruState>& states, Mode mode = Mode::eval);
  /// Runs a sequence from `states`; returns the top h at every step.
  std::vector<ag::Var> unroll(const std::vector<ag::Var>& xs, std::vector<EruState>& states,
                              Mode mode = Mode::eval);

  std::vector<EruCell>& cells() { return cells_; }
  const EruConfig& config() const { return cfg_; }
  ParameterList parameters() const;

 private:
  EruConfig cfg_;
  std::vector<EruCell> cells_;
};

/// Weights + biases of a standard LSTM layer: 4H (E + H) + 4H.
std::uint64_t lstm_param_count(std::size_t embed_dim, std::size_t hidden_dim);

/// All learnable elements of one ERU layer (EESP incl. batch norm and PReLU,
/// recurrent weights, bias).
std::uint64_t eru_layer_param_count(const EruConfig& cfg, std::size_t layer = 0);

}  // namespace eesp
