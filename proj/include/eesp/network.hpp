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

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "eesp/eesp_unit.hpp"

namespace eesp {

/// Width profile of one classification network.
struct NetworkProfile {
  std::string name;
  std::size_t stem_channels = 32;
  /// Output channels at the 56, 28, 14 and 7 levels (for a 224 input).
  std::array<std::size_t, 4> stage_channels{};
  /// Stride-1 EESP units after each strided unit.
  std::array<std::size_t, 4> stage_repeats{0, 3, 7, 3};
  std::size_t head_channels = 1024;
  std::size_t classes = 1000;
  std::size_t branches = 4;
  std::size_t groups = 4;
  std::size_t head_groups = 4;
};

void validate(const NetworkProfile& profile);

/// The six reference profiles c28 ... c284, named by their MFLOP budget.
const std::vector<NetworkProfile>& canonical_profiles();
/// Throws std::invalid_argument for an unknown name.
const NetworkProfile& profile_by_name(std::string_view name);

/// Published complexity (millions of multiply-adds) and parameters (millions)
/// for a canonical profile at 224 x 224.
struct ReferenceCost {
  double macs_millions;
  double params_millions;
};
ReferenceCost reference_cost(std::string_view profile_name);

/// Receptive field cap n_d for a level of extent Z: 5 + floor(Z / 7), with
/// the 7 x 7 level pinned to 5. Throws ConfigError for Z < 7.
std::size_t receptive_cap(std::size_t Z);

/// Cap used when building for an arbitrary input size. Extents >= 7 use
/// receptive_cap; smaller maps get the largest odd field that fits (min 3).
std::size_t level_cap(std::size_t Z);

/// Which branch convolution the network is built with.
enum class ConvArm { dilated_standard, depthwise_separable, depthwise_dilated_separable };

std::string to_string(ConvArm arm);
ConvArm conv_arm_from_string(std::string_view name);

struct NetworkOptions {
  ConvArm arm = ConvArm::depthwise_dilated_separable;
  bool hff = true;
  bool input_shortcut = true;
  /// Input extent that receptive-field caps are computed for.
  std::size_t design_extent = 224;
};

/// Anything train_toy can fit.
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual ag::Var forward(const ag::Var& x, Mode mode) = 0;
  virtual ParameterList parameters() const = 0;
  virtual std::size_t classes() const = 0;
};

class Network : public Classifier {
 public:
  Network(NetworkProfile profile, NetworkOptions options, Rng rng);

  ag::Var forward(const ag::Var& x, Mode mode) override;
  Tensor forward(const Tensor& x, Mode mode);
  ParameterList parameters() const override;
  std::size_t classes() const override { return profile_.classes; }

  const NetworkProfile& profile() const { return profile_; }
  const NetworkOptions& options() const { return options_; }

  /// Ordered convolution / classifier ledger for an in_h x in_w input.
  std::vector<LayerRecord> ledger(std::size_t in_h, std::size_t in_w) const;
  /// Batch-norm and PReLU parameter count.
  std::uint64_t affine_params() const;

  struct UnitInfo {
    std::string name;
    std::size_t level;  // 0..3 for the 56, 28, 14, 7 levels
    std::size_t design_extent;
    std::size_t cap;
    std::vector<std::size_t> rates;
    std::size_t in_channels;
    std::size_t out_channels;
    bool strided;
  };
  std::vector<UnitInfo> units() const;

 private:
  NetworkProfile profile_;
  NetworkOptions options_;
  ConvUnit stem_;
  std::vector<StridedEespUnit> down_;
  std::vector<std::vector<EespUnit>> stages_;
  ConvUnit head_depthwise_;
  ConvUnit head_group_;
  Linear classifier_;
};

Network build_network(const NetworkProfile& profile, Rng rng, NetworkOptions options = {});

}  // namespace eesp
