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

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eesp/layers.hpp"

namespace eesp {

/// Block flavours.
///  esp_baseline: point-wise reduce, standard dilated 3x3 branches, no
///                projection after the merge.
///  eesp_a:       group point-wise reduce, depth-wise dilated branches, K
///                independent point-wise projections after HFF.
///  eesp:         as eesp_a with the K projections fused into one group
///                point-wise convolution.
///  strided_eesp: stride-2 eesp body, average-pooled input concatenated in
///                place of the residual, optional long-range image shortcut.
enum class Variant { esp_baseline, eesp_a, eesp, strided_eesp };

std::string to_string(Variant v);

struct EespConfig {
  std::size_t in_channels = 0;   // M
  std::size_t out_channels = 0;  // N_out
  std::size_t branches = 4;      // K
  std::size_t groups = 4;        // g
  std::size_t kernel = 3;
  /// One rate per branch, ascending. Empty means default_dilation_rates().
  std::vector<std::size_t> dilation_rates;
  std::size_t stride = 1;
  Variant variant = Variant::eesp;
  std::optional<std::size_t> receptive_field_cap;  // n_d
  /// Inner body of a strided unit: eesp or esp_baseline.
  Variant strided_body = Variant::eesp;
  bool hff = true;
  /// Residual add for stride-1 units; requires out_channels == in_channels.
  bool residual = true;
  std::size_t spatial_rank = 2;

  /// d: N_out / K for stride-1 units, (N_out - M) / K for strided ones.
  std::size_t branch_width() const;
  /// Channels produced by the branch body, K * d.
  std::size_t body_width() const { return branches * branch_width(); }
  /// Rates actually used, after defaulting and validation.
  std::vector<std::size_t> rates() const;
  Variant body_variant() const {
    return variant == Variant::strided_eesp ? strided_body : variant;
  }
};

/// Throws ConfigError on any invariant violation.
void validate(const EespConfig& cfg);

/// Branch k (1-based) gets rate k, then each rate is clamped so the
/// effective kernel (n-1)*r+1 stays within `cap`. Clamping may repeat rates.
std::vector<std::size_t> default_dilation_rates(std::size_t branches, std::size_t kernel,
                                                std::optional<std::size_t> cap);

struct ShortcutConfig {
  std::size_t pool_repeats = 1;  // P
  std::size_t image_channels = 3;
  std::size_t mid_channels = 3;
  std::size_t out_channels = 0;
};

/// Hierarchical feature fusion: out_1 = b_1, out_k = out_{k-1} + b_k.
std::vector<Tensor> hff_fuse(std::span<const Tensor> branches);
std::vector<ag::Var> hff_fuse(std::span<const ag::Var> branches);

/// Reduce -> split -> transform -> (HFF) -> merge. Shared by the stride-1
/// and strided units.
class EespBody {
 public:
  EespBody(const std::string& name, const EespConfig& cfg, Rng rng);

  ag::Var forward(const ag::Var& x, Mode mode);

  ConvUnit& reduce() { return reduce_; }
  std::vector<ConvUnit>& branches() { return branches_; }
  /// One grouped unit for eesp, K point-wise units for eesp_a, none for ESP.
  std::vector<ConvUnit>& projections() { return projections_; }
  const std::vector<ConvUnit>& projections() const { return projections_; }

  void collect(ParameterList& out) const;
  void describe(std::vector<LayerRecord>& out, std::size_t in_h, std::size_t in_w) const;
  std::vector<ConvSpec> conv_specs() const;
  std::uint64_t affine_params() const;

 private:
  std::string name_;
  EespConfig cfg_;
  ConvUnit reduce_;
  std::vector<ConvUnit> branches_;
  std::vector<ConvUnit> projections_;
};

/// Stride-1 unit (esp_baseline, eesp_a, eesp): body, residual add, PReLU.
class EespUnit {
 public:
  EespUnit(std::string name, EespConfig cfg, Rng rng);

  ag::Var forward(const ag::Var& x, Mode mode);
  Tensor forward(const Tensor& x, Mode mode);

  const EespConfig& config() const { return cfg_; }
  EespBody& body() { return body_; }
  PRelu& activation() { return act_; }

  void collect(ParameterList& out) const;
  ParameterList parameters() const;
  void describe(std::vector<LayerRecord>& out, std::size_t in_h, std::size_t in_w) const;
  std::uint64_t affine_params() const;

 private:
  std::string name_;
  EespConfig cfg_;
  EespBody body_;
  PRelu act_;
};

/// Down-sampling unit: concat(avgpool(x), body(x)) [+ shortcut(image)] -> PReLU.
class StridedEespUnit {
 public:
  StridedEespUnit(std::string name, EespConfig cfg, std::optional<ShortcutConfig> shortcut,
                  Rng rng);

  /// `image` is the raw network input; ignored when the unit has no shortcut.
  ag::Var forward(const ag::Var& x, const ag::Var* image, Mode mode);
  Tensor forward(const Tensor& x, const Tensor* image, Mode mode);

  const EespConfig& config() const { return cfg_; }
  const std::optional<ShortcutConfig>& shortcut() const { return shortcut_cfg_; }
  EespBody& body() { return body_; }
  ConvUnit* shortcut_spatial() { return shortcut_spatial_ ? &*shortcut_spatial_ : nullptr; }
  ConvUnit* shortcut_project() { return shortcut_project_ ? &*shortcut_project_ : nullptr; }
  PRelu& activation() { return act_; }

  void collect(ParameterList& out) const;
  ParameterList parameters() const;
  void describe(std::vector<LayerRecord>& out, std::size_t in_h, std::size_t in_w) const;
  std::uint64_t affine_params() const;

 private:
  std::string name_;
  EespConfig cfg_;
  std::optional<ShortcutConfig> shortcut_cfg_;
  EespBody body_;
  std::optional<ConvUnit> shortcut_spatial_;
  std::optional<ConvUnit> shortcut_project_;
  PRelu act_;
};

/// Convolutions a unit with this configuration is made of, in order,
/// including the shortcut convolutions when given.
std::vector<ConvSpec> unit_conv_specs(const EespConfig& cfg,
                                      const std::optional<ShortcutConfig>& shortcut = {});
/// Sum of weight_count over unit_conv_specs.
std::uint64_t eesp_param_count(const EespConfig& cfg,
                               const std::optional<ShortcutConfig>& shortcut = {});

/// Closed-form parameter ratio between an ESP unit and its EESP counterpart:
///   (M d + n^2 d^2 K) / (M d / g + (n^2 + d) d K).
/// With separable = false the denominator keeps standard dilated branches,
/// (M d / g + n^2 d^2 K).
Ratio esp_vs_eesp_ratio(std::size_t M, std::size_t d, std::size_t K, std::size_t g,
                        std::size_t n, bool separable = true);

}  // namespace eesp
