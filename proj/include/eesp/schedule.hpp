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

#include <string>
#include <string_view>
#include <vector>

#include "eesp/layers.hpp"

namespace eesp {

enum class ScheduleMode { cyclic, fixed };

std::string to_string(ScheduleMode mode);
ScheduleMode schedule_mode_from_string(std::string_view name);

/// Linear warm-restart schedule:
///   lr(t) = (eta_max - (t mod T) * eta_min) * 2^-m,  m = #milestones <= t.
/// Fixed mode drops the cyclic term and keeps eta_max (with the same decay).
struct LrSchedule {
  double eta_min = 0.1;
  double eta_max = 0.5;
  std::size_t T = 5;
  std::vector<std::size_t> milestones;
  ScheduleMode mode = ScheduleMode::cyclic;
};

/// Throws ConfigError when eta_max < eta_min, eta_min <= 0, T == 0, the
/// milestones are not strictly increasing, or the cycle would reach lr <= 0.
void validate(const LrSchedule& s);

double lr_at(const LrSchedule& s, std::size_t epoch);

/// lr_at for epochs [0, epochs).
std::vector<double> lr_sequence(const LrSchedule& s, std::size_t epochs);

/// velocity = momentum * velocity + grad + weight_decay * param
/// param   -= lr * velocity
/// Throws ShapeError when the three shapes differ.
void sgd_step(Tensor& param, const Tensor& grad, Tensor& velocity, double lr, double momentum,
              double weight_decay);

/// Momentum SGD over a parameter list. Velocities start at zero.
class Sgd {
 public:
  Sgd(ParameterList params, double momentum = 0.9, double weight_decay = 4e-5);

  /// Applies one update with the gradients currently held by the parameters.
  /// Parameters without a gradient are treated as having a zero gradient.
  void step(double lr);
  void zero_grad();

  const ParameterList& parameters() const { return params_; }
  const std::vector<Tensor>& velocities() const { return velocity_; }

 private:
  ParameterList params_;
  std::vector<Tensor> velocity_;
  double momentum_;
  double weight_decay_;
};

}  // namespace eesp
