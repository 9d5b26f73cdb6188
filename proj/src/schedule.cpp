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

#include "eesp/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "eesp/errors.hpp"

namespace eesp {

std::string to_string(ScheduleMode mode) {
  return mode == ScheduleMode::cyclic ? "cyclic" : "fixed";
}

ScheduleMode schedule_mode_from_string(std::string_view name) {
  if (name == "cyclic") return ScheduleMode::cyclic;
  if (name == "fixed") return ScheduleMode::fixed;
  throw std::invalid_argument("unknown schedule mode '" + std::string(name) + "'");
}

void validate(const LrSchedule& s) {
  if (!(s.eta_min > 0.0)) throw ConfigError("schedule: eta_min must be > 0");
  if (s.eta_max < s.eta_min) throw ConfigError("schedule: eta_max must be >= eta_min");
  if (s.T == 0) throw ConfigError("schedule: T must be >= 1");
  for (std::size_t i = 1; i < s.milestones.size(); ++i) {
    if (s.milestones[i] <= s.milestones[i - 1]) {
      throw ConfigError("schedule: milestones must be strictly increasing");
    }
  }
  if (s.mode == ScheduleMode::cyclic) {
    const double floor_lr = s.eta_max - static_cast<double>(s.T - 1) * s.eta_min;
    // small slack so (0.5, 0.1, T=5) -> 0.1 is not rejected by rounding
    if (floor_lr <= 1e-12) {
      throw ConfigError("schedule: eta_max - (T-1)*eta_min must stay positive");
    }
  }
}

double lr_at(const LrSchedule& s, std::size_t epoch) {
  validate(s);
  double base = s.eta_max;
  if (s.mode == ScheduleMode::cyclic) {
    base = s.eta_max - static_cast<double>(epoch % s.T) * s.eta_min;
  }
  const auto m = std::count_if(s.milestones.begin(), s.milestones.end(),
                               [&](std::size_t ms) { return ms <= epoch; });
  return std::ldexp(base, -static_cast<int>(m));
}

std::vector<double> lr_sequence(const LrSchedule& s, std::size_t epochs) {
  std::vector<double> out;
  out.reserve(epochs);
  for (std::size_t t = 0; t < epochs; ++t) out.push_back(lr_at(s, t));
  return out;
}

void sgd_step(Tensor& param, const Tensor& grad, Tensor& velocity, double lr, double momentum,
              double weight_decay) {
  if (!param.same_shape(grad) || !param.same_shape(velocity)) {
    throw ShapeError("sgd_step: param " + to_string(param.shape()) + ", grad " +
                     to_string(grad.shape()) + ", velocity " + to_string(velocity.shape()));
  }
  auto p = param.data();
  auto g = grad.data();
  auto v = velocity.data();
  for (std::size_t i = 0; i < p.size(); ++i) {
    v[i] = momentum * v[i] + g[i] + weight_decay * p[i];
    p[i] -= lr * v[i];
  }
}

Sgd::Sgd(ParameterList params, double momentum, double weight_decay)
    : params_(std::move(params)), momentum_(momentum), weight_decay_(weight_decay) {
  velocity_.reserve(params_.size());
  for (const auto& p : params_) velocity_.push_back(Tensor::zeros_like(p.var.value()));
}

void Sgd::step(double lr) {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    ag::Var& var = params_[i].var;
    sgd_step(var.mutable_value(), var.grad(), velocity_[i], lr, momentum_, weight_decay_);
  }
}

void Sgd::zero_grad() {
  for (auto& p : params_) p.var.zero_grad();
}

}  // namespace eesp
