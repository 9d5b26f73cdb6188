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

#include "eesp/eesp_unit.hpp"

#include <algorithm>
#include <tuple>

#include "eesp/errors.hpp"
#include "eesp/tensor_ops.hpp"

namespace eesp {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::esp_baseline: return "esp_baseline";
    case Variant::eesp_a: return "eesp_a";
    case Variant::eesp: return "eesp";
    case Variant::strided_eesp: return "strided_eesp";
  }
  return "unknown";
}

std::size_t EespConfig::branch_width() const {
  if (branches == 0) throw ConfigError("EESP unit needs at least one branch");
  if (variant == Variant::strided_eesp) {
    if (out_channels <= in_channels) {
      throw ConfigError("strided unit must widen: N_out=" + std::to_string(out_channels) +
                        " <= M=" + std::to_string(in_channels));
    }
    const std::size_t extra = out_channels - in_channels;
    if (extra % branches != 0) {
      throw ConfigError("N_out - M = " + std::to_string(extra) + " not divisible by K=" +
                        std::to_string(branches));
    }
    return extra / branches;
  }
  if (out_channels % branches != 0) {
    throw ConfigError("N_out=" + std::to_string(out_channels) + " not divisible by K=" +
                      std::to_string(branches));
  }
  return out_channels / branches;
}

std::vector<std::size_t> default_dilation_rates(std::size_t branches, std::size_t kernel,
                                                std::optional<std::size_t> cap) {
  if (kernel == 0 || kernel % 2 == 0) throw ConfigError("kernel must be odd");
  std::vector<std::size_t> rates(branches);
  for (std::size_t k = 0; k < branches; ++k) {
    std::size_t r = k + 1;
    if (cap && kernel > 1) {
      if (*cap < kernel) {
        throw ConfigError("receptive field cap " + std::to_string(*cap) +
                          " is smaller than the kernel");
      }
      r = std::min(r, (*cap - 1) / (kernel - 1));
    }
    rates[k] = r;
  }
  return rates;
}

std::vector<std::size_t> EespConfig::rates() const {
  if (dilation_rates.empty()) return default_dilation_rates(branches, kernel, receptive_field_cap);
  return dilation_rates;
}

void validate(const EespConfig& cfg) {
  auto fail = [](const std::string& why) { throw ConfigError("EespConfig: " + why); };
  if (cfg.in_channels == 0 || cfg.out_channels == 0) fail("channel counts must be >= 1");
  if (cfg.groups == 0) fail("groups must be >= 1");
  if (cfg.kernel == 0 || cfg.kernel % 2 == 0) fail("kernel must be odd");
  if (cfg.spatial_rank != 1 && cfg.spatial_rank != 2) fail("spatial rank must be 1 or 2");
  const bool strided = cfg.variant == Variant::strided_eesp;
  if (strided != (cfg.stride == 2)) fail("strided_eesp and stride 2 go together");
  if (cfg.stride != 1 && cfg.stride != 2) fail("stride must be 1 or 2");
  if (strided) {
    if (cfg.spatial_rank != 2) fail("strided units are 2D only");
    if (cfg.strided_body == Variant::strided_eesp) fail("strided body cannot itself be strided");
  }
  const std::size_t d = cfg.branch_width();
  if (!strided && cfg.residual && cfg.out_channels != cfg.in_channels) {
    fail("residual add needs N_out == M (" + std::to_string(cfg.out_channels) + " vs " +
         std::to_string(cfg.in_channels) + ")");
  }
  const auto rates = cfg.rates();
  if (rates.size() != cfg.branches) {
    fail(std::to_string(rates.size()) + " dilation rates for " + std::to_string(cfg.branches) +
         " branches");
  }
  for (std::size_t i = 0; i < rates.size(); ++i) {
    if (rates[i] == 0) fail("dilation rates must be >= 1");
    if (i > 0 && rates[i] < rates[i - 1]) fail("dilation rates must be ascending");
    if (cfg.receptive_field_cap &&
        effective_receptive_field(cfg.kernel, rates[i]) > *cfg.receptive_field_cap) {
      fail("rate " + std::to_string(rates[i]) + " exceeds receptive field cap " +
           std::to_string(*cfg.receptive_field_cap));
    }
  }
  if (cfg.body_variant() != Variant::esp_baseline) {
    if (cfg.in_channels % cfg.groups != 0 || d % cfg.groups != 0) {
      fail("groups " + std::to_string(cfg.groups) + " must divide M=" +
           std::to_string(cfg.in_channels) + " and d=" + std::to_string(d));
    }
  }
}

std::vector<Tensor> hff_fuse(std::span<const Tensor> branches) {
  std::vector<Tensor> out;
  out.reserve(branches.size());
  for (std::size_t k = 0; k < branches.size(); ++k) {
    if (!branches[k].same_shape(branches.front())) {
      throw ShapeError("hff_fuse: branch " + std::to_string(k) + " has shape " +
                       to_string(branches[k].shape()));
    }
    out.push_back(k == 0 ? branches[0] : add(out.back(), branches[k]));
  }
  return out;
}

std::vector<ag::Var> hff_fuse(std::span<const ag::Var> branches) {
  std::vector<ag::Var> out;
  out.reserve(branches.size());
  for (std::size_t k = 0; k < branches.size(); ++k) {
    if (branches[k].shape() != branches.front().shape()) {
      throw ShapeError("hff_fuse: branch " + std::to_string(k) + " has shape " +
                       to_string(branches[k].shape()));
    }
    out.push_back(k == 0 ? branches[0] : ag::add(out.back(), branches[k]));
  }
  return out;
}

namespace {

struct BodySpecs {
  ConvSpec reduce;
  std::vector<ConvSpec> branches;
  std::vector<ConvSpec> projections;
};

BodySpecs body_specs(const EespConfig& cfg) {
  validate(cfg);
  const std::size_t M = cfg.in_channels, d = cfg.branch_width(), K = cfg.branches;
  const std::size_t n = cfg.kernel, g = cfg.groups, rank = cfg.spatial_rank;
  const Variant v = cfg.body_variant();
  BodySpecs s;
  s.reduce = (v == Variant::esp_baseline ? ConvSpec::pointwise(M, d)
                                         : ConvSpec::group(M, d, 1, g))
                 .with_rank(rank);
  for (std::size_t r : cfg.rates()) {
    s.branches.push_back((v == Variant::esp_baseline
                              ? ConvSpec::standard(d, d, n, cfg.stride, r)
                              : ConvSpec::depthwise_dilated(d, n, r, cfg.stride))
                             .with_rank(rank));
  }
  if (v == Variant::eesp) {
    s.projections.push_back(ConvSpec::group(K * d, K * d, 1, g).with_rank(rank));
  } else if (v == Variant::eesp_a) {
    for (std::size_t k = 0; k < K; ++k) {
      s.projections.push_back(ConvSpec::pointwise(d, d).with_rank(rank));
    }
  }
  return s;
}

std::vector<ConvSpec> shortcut_specs(const ShortcutConfig& sc) {
  return {ConvSpec::standard(sc.image_channels, sc.mid_channels, 3),
          ConvSpec::pointwise(sc.mid_channels, sc.out_channels)};
}

}  // namespace

EespBody::EespBody(const std::string& name, const EespConfig& cfg, Rng rng)
    : name_(name),
      cfg_(cfg),
      reduce_(name + ".reduce", body_specs(cfg).reduce, ConvUnit::Post::bn_prelu, rng.split(1)) {
  const BodySpecs specs = body_specs(cfg);
  for (std::size_t k = 0; k < specs.branches.size(); ++k) {
    branches_.emplace_back(name + ".branch" + std::to_string(k + 1), specs.branches[k],
                           ConvUnit::Post::bn_prelu, rng.split(10 + k));
  }
  for (std::size_t k = 0; k < specs.projections.size(); ++k) {
    const std::string suffix =
        specs.projections.size() == 1 ? ".project" : ".project" + std::to_string(k + 1);
    projections_.emplace_back(name + suffix, specs.projections[k], ConvUnit::Post::bn,
                              rng.split(100 + k));
  }
}

ag::Var EespBody::forward(const ag::Var& x, Mode mode) {
  if (x.value().rank() < 2 || x.value().channels() != cfg_.in_channels) {
    throw ShapeError(name_ + ": expected " + std::to_string(cfg_.in_channels) +
                     " input channels, got shape " + to_string(x.shape()));
  }
  const ag::Var reduced = reduce_.forward(x, mode);
  std::vector<ag::Var> maps;
  maps.reserve(branches_.size());
  for (auto& b : branches_) maps.push_back(b.forward(reduced, mode));
  if (cfg_.hff) maps = hff_fuse(maps);

  if (projections_.size() > 1) {
    // eesp_a: one point-wise projection per fused branch.
    std::vector<ag::Var> projected;
    for (std::size_t k = 0; k < maps.size(); ++k) {
      projected.push_back(projections_[k].forward(maps[k], mode));
    }
    return ag::concat_channels(projected);
  }
  ag::Var merged = ag::concat_channels(maps);
  if (projections_.size() == 1) merged = projections_[0].forward(merged, mode);
  return merged;
}

void EespBody::collect(ParameterList& out) const {
  reduce_.collect(out);
  for (const auto& b : branches_) b.collect(out);
  for (const auto& p : projections_) p.collect(out);
}

void EespBody::describe(std::vector<LayerRecord>& out, std::size_t in_h,
                        std::size_t in_w) const {
  out.push_back(conv_record(reduce_.name(), reduce_.spec(), in_h, in_w));
  std::size_t oh = in_h, ow = in_w;
  for (const auto& b : branches_) {
    std::tie(oh, ow) = output_extent(b.spec(), in_h, in_w);
    out.push_back(conv_record(b.name(), b.spec(), oh, ow));
  }
  for (const auto& p : projections_) out.push_back(conv_record(p.name(), p.spec(), oh, ow));
}

std::vector<ConvSpec> EespBody::conv_specs() const {
  std::vector<ConvSpec> specs{reduce_.spec()};
  for (const auto& b : branches_) specs.push_back(b.spec());
  for (const auto& p : projections_) specs.push_back(p.spec());
  return specs;
}

std::uint64_t EespBody::affine_params() const {
  std::uint64_t n = reduce_.affine_params();
  for (const auto& b : branches_) n += b.affine_params();
  for (const auto& p : projections_) n += p.affine_params();
  return n;
}

EespUnit::EespUnit(std::string name, EespConfig cfg, Rng rng)
    : name_(std::move(name)),
      cfg_(std::move(cfg)),
      body_(name_, cfg_, rng),
      act_(name_ + ".prelu", cfg_.out_channels) {
  if (cfg_.variant == Variant::strided_eesp) {
    throw ConfigError("EespUnit is stride-1; use StridedEespUnit for strided_eesp");
  }
}

ag::Var EespUnit::forward(const ag::Var& x, Mode mode) {
  ag::Var y = body_.forward(x, mode);
  if (cfg_.residual) y = ag::add(y, x);
  return act_.forward(y);
}

Tensor EespUnit::forward(const Tensor& x, Mode mode) {
  return forward(ag::Var::constant(x), mode).value();
}

void EespUnit::collect(ParameterList& out) const {
  body_.collect(out);
  act_.collect(out);
}

ParameterList EespUnit::parameters() const {
  ParameterList out;
  collect(out);
  return out;
}

void EespUnit::describe(std::vector<LayerRecord>& out, std::size_t in_h,
                        std::size_t in_w) const {
  body_.describe(out, in_h, in_w);
}

std::uint64_t EespUnit::affine_params() const {
  return body_.affine_params() + cfg_.out_channels;
}

namespace {

EespConfig require_strided(EespConfig cfg) {
  if (cfg.variant != Variant::strided_eesp) {
    throw ConfigError("StridedEespUnit needs variant strided_eesp");
  }
  validate(cfg);
  return cfg;
}

}  // namespace

StridedEespUnit::StridedEespUnit(std::string name, EespConfig cfg,
                                 std::optional<ShortcutConfig> shortcut, Rng rng)
    : name_(std::move(name)),
      cfg_(require_strided(std::move(cfg))),
      shortcut_cfg_(std::move(shortcut)),
      body_(name_, cfg_, rng),
      act_(name_ + ".prelu", cfg_.out_channels) {
  if (shortcut_cfg_) {
    ShortcutConfig& sc = *shortcut_cfg_;
    if (sc.out_channels == 0) sc.out_channels = cfg_.out_channels;
    if (sc.out_channels != cfg_.out_channels) {
      throw ConfigError("shortcut must project to N_out=" + std::to_string(cfg_.out_channels));
    }
    if (sc.pool_repeats == 0) throw ConfigError("shortcut needs P >= 1 pooling steps");
    const auto specs = shortcut_specs(sc);
    shortcut_spatial_.emplace(name_ + ".shortcut.conv3x3", specs[0], ConvUnit::Post::bn_prelu,
                              rng.split(1000));
    shortcut_project_.emplace(name_ + ".shortcut.project", specs[1], ConvUnit::Post::bn,
                              rng.split(1001));
  }
}

ag::Var StridedEespUnit::forward(const ag::Var& x, const ag::Var* image, Mode mode) {
  const ag::Var pooled = ag::avg_pool2d(x);
  const ag::Var body = body_.forward(x, mode);
  if (pooled.shape()[2] != body.shape()[2] || pooled.shape()[3] != body.shape()[3]) {
    throw ShapeError(name_ + ": pooled and branch extents differ");
  }
  const std::vector<ag::Var> parts{pooled, body};
  ag::Var out = ag::concat_channels(parts);
  if (shortcut_cfg_) {
    if (!image) throw ShapeError(name_ + ": unit has an input shortcut but no image was given");
    ag::Var img = *image;
    for (std::size_t p = 0; p < shortcut_cfg_->pool_repeats; ++p) img = ag::avg_pool2d(img);
    if (img.shape()[2] != out.shape()[2] || img.shape()[3] != out.shape()[3]) {
      throw ShapeError(name_ + ": image pooled " + std::to_string(shortcut_cfg_->pool_repeats) +
                       "x is " + to_string(img.shape()) + ", feature map is " +
                       to_string(out.shape()));
    }
    img = shortcut_spatial_->forward(img, mode);
    img = shortcut_project_->forward(img, mode);
    out = ag::add(out, img);
  }
  return act_.forward(out);
}

Tensor StridedEespUnit::forward(const Tensor& x, const Tensor* image, Mode mode) {
  std::optional<ag::Var> img;
  if (image) img = ag::Var::constant(*image);
  return forward(ag::Var::constant(x), img ? &*img : nullptr, mode).value();
}

void StridedEespUnit::collect(ParameterList& out) const {
  body_.collect(out);
  if (shortcut_spatial_) {
    shortcut_spatial_->collect(out);
    shortcut_project_->collect(out);
  }
  act_.collect(out);
}

ParameterList StridedEespUnit::parameters() const {
  ParameterList out;
  collect(out);
  return out;
}

void StridedEespUnit::describe(std::vector<LayerRecord>& out, std::size_t in_h,
                               std::size_t in_w) const {
  body_.describe(out, in_h, in_w);
  if (shortcut_spatial_) {
    const std::size_t oh = (in_h - 1) / 2 + 1, ow = (in_w - 1) / 2 + 1;
    out.push_back(conv_record(shortcut_spatial_->name(), shortcut_spatial_->spec(), oh, ow));
    out.push_back(conv_record(shortcut_project_->name(), shortcut_project_->spec(), oh, ow));
  }
}

std::uint64_t StridedEespUnit::affine_params() const {
  std::uint64_t n = body_.affine_params() + cfg_.out_channels;
  if (shortcut_spatial_) n += shortcut_spatial_->affine_params() + shortcut_project_->affine_params();
  return n;
}

std::vector<ConvSpec> unit_conv_specs(const EespConfig& cfg,
                                      const std::optional<ShortcutConfig>& shortcut) {
  const BodySpecs s = body_specs(cfg);
  std::vector<ConvSpec> specs{s.reduce};
  specs.insert(specs.end(), s.branches.begin(), s.branches.end());
  specs.insert(specs.end(), s.projections.begin(), s.projections.end());
  if (shortcut && cfg.variant == Variant::strided_eesp) {
    ShortcutConfig sc = *shortcut;
    if (sc.out_channels == 0) sc.out_channels = cfg.out_channels;
    for (const auto& spec : shortcut_specs(sc)) specs.push_back(spec);
  }
  return specs;
}

std::uint64_t eesp_param_count(const EespConfig& cfg,
                               const std::optional<ShortcutConfig>& shortcut) {
  std::uint64_t total = 0;
  for (const auto& spec : unit_conv_specs(cfg, shortcut)) total += weight_count(spec);
  return total;
}

Ratio esp_vs_eesp_ratio(std::size_t M, std::size_t d, std::size_t K, std::size_t g,
                        std::size_t n, bool separable) {
  if (M == 0 || d == 0 || K == 0 || g == 0 || n == 0) {
    throw ConfigError("esp_vs_eesp_ratio: all arguments must be >= 1");
  }
  const std::uint64_t n2 = std::uint64_t{n} * n;
  const std::uint64_t Md = std::uint64_t{M} * d;
  const std::uint64_t esp = Md + n2 * d * d * K;
  const std::uint64_t branches = separable ? (n2 + d) * d * K : n2 * d * d * K;
  // Scale both sides by g so M d / g stays integral.
  return {esp * g, Md + g * branches};
}

}  // namespace eesp
