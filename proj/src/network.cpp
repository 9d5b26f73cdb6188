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

#include "eesp/network.hpp"

#include <stdexcept>

#include "eesp/errors.hpp"

namespace eesp {

namespace {

constexpr std::size_t kLevels = 4;

struct CanonicalEntry {
  NetworkProfile profile;
  ReferenceCost cost;
};

const std::vector<CanonicalEntry>& canonical_entries() {
  static const std::vector<CanonicalEntry> entries = [] {
    auto make = [](std::string name, std::size_t stem, std::array<std::size_t, 4> stages,
                   std::size_t head) {
      NetworkProfile p;
      p.name = std::move(name);
      p.stem_channels = stem;
      p.stage_channels = stages;
      p.head_channels = head;
      return p;
    };
    return std::vector<CanonicalEntry>{
        {make("c28", 16, {32, 64, 128, 256}, 1024), {28, 1.24}},
        {make("c86", 32, {64, 128, 256, 512}, 1024), {86, 1.67}},
        {make("c123", 32, {80, 160, 320, 640}, 1024), {123, 1.97}},
        {make("c169", 32, {96, 192, 384, 768}, 1024), {169, 2.31}},
        {make("c224", 32, {112, 224, 448, 896}, 1280), {224, 3.03}},
        {make("c284", 32, {128, 256, 512, 1024}, 1280), {284, 3.49}},
    };
  }();
  return entries;
}

}  // namespace

void validate(const NetworkProfile& p) {
  auto fail = [&](const std::string& why) {
    throw ConfigError("profile " + p.name + ": " + why);
  };
  if (p.stem_channels == 0 || p.head_channels == 0 || p.classes == 0) {
    fail("channel counts must be >= 1");
  }
  if (p.branches == 0 || p.groups == 0 || p.head_groups == 0) fail("K, g must be >= 1");
  std::size_t prev = p.stem_channels;
  for (std::size_t i = 0; i < kLevels; ++i) {
    const std::size_t c = p.stage_channels[i];
    if (c <= prev) fail("stage channels must be strictly increasing");
    if (c % p.branches != 0) fail("stage channels must be divisible by K");
    prev = c;
  }
  if (p.stage_channels[3] % p.head_groups != 0 || p.head_channels % p.head_groups != 0) {
    fail("head group convolution widths must be divisible by its groups");
  }
}

const std::vector<NetworkProfile>& canonical_profiles() {
  static const std::vector<NetworkProfile> profiles = [] {
    std::vector<NetworkProfile> out;
    for (const auto& e : canonical_entries()) out.push_back(e.profile);
    return out;
  }();
  return profiles;
}

const NetworkProfile& profile_by_name(std::string_view name) {
  for (const auto& p : canonical_profiles()) {
    if (p.name == name) return p;
  }
  throw std::invalid_argument("unknown profile '" + std::string(name) +
                              "' (expected one of c28, c86, c123, c169, c224, c284)");
}

ReferenceCost reference_cost(std::string_view name) {
  for (const auto& e : canonical_entries()) {
    if (e.profile.name == name) return e.cost;
  }
  throw std::invalid_argument("no reference cost for profile '" + std::string(name) + "'");
}

std::size_t receptive_cap(std::size_t Z) {
  if (Z < 7) throw ConfigError("receptive_cap: spatial extent " + std::to_string(Z) + " < 7");
  // 5 + 7/7 would give 6; the 7x7 level is documented as 5x5.
  if (Z == 7) return 5;
  return 5 + Z / 7;
}

std::size_t level_cap(std::size_t Z) {
  if (Z >= 7) return receptive_cap(Z);
  const std::size_t odd = Z % 2 == 1 ? Z : Z - 1;
  return std::max<std::size_t>(3, odd);
}

std::string to_string(ConvArm arm) {
  switch (arm) {
    case ConvArm::dilated_standard: return "dilated_standard";
    case ConvArm::depthwise_separable: return "depthwise_separable";
    case ConvArm::depthwise_dilated_separable: return "depthwise_dilated_separable";
  }
  return "unknown";
}

ConvArm conv_arm_from_string(std::string_view name) {
  for (ConvArm a : {ConvArm::dilated_standard, ConvArm::depthwise_separable,
                    ConvArm::depthwise_dilated_separable}) {
    if (to_string(a) == name) return a;
  }
  throw std::invalid_argument("unknown convolution arm '" + std::string(name) + "'");
}

namespace {

EespConfig level_config(const NetworkProfile& p, const NetworkOptions& o, std::size_t in,
                        std::size_t out, bool strided, std::size_t extent) {
  EespConfig cfg;
  cfg.in_channels = in;
  cfg.out_channels = out;
  cfg.branches = p.branches;
  cfg.groups = p.groups;
  cfg.kernel = 3;
  cfg.hff = o.hff;
  cfg.receptive_field_cap = level_cap(extent);
  cfg.stride = strided ? 2 : 1;
  const Variant body =
      o.arm == ConvArm::dilated_standard ? Variant::esp_baseline : Variant::eesp;
  cfg.variant = strided ? Variant::strided_eesp : body;
  cfg.strided_body = body;
  cfg.dilation_rates = o.arm == ConvArm::depthwise_separable
                           ? std::vector<std::size_t>(p.branches, 1)
                           : default_dilation_rates(p.branches, 3, cfg.receptive_field_cap);
  return cfg;
}

std::size_t design_level_extent(const NetworkOptions& o, std::size_t level) {
  // The stem halves once, then each level halves again.
  return std::max<std::size_t>(1, o.design_extent >> (level + 2));
}

const NetworkProfile& checked(const NetworkProfile& p) {
  validate(p);
  return p;
}

}  // namespace

Network::Network(NetworkProfile profile, NetworkOptions options, Rng rng)
    : profile_(checked(profile)),
      options_(options),
      stem_("stem", ConvSpec::standard(3, profile_.stem_channels, 3, 2),
            ConvUnit::Post::bn_prelu, rng.split(1)),
      head_depthwise_("head.depthwise", ConvSpec::depthwise(profile_.stage_channels[3], 3),
                      ConvUnit::Post::bn_prelu, rng.split(2)),
      head_group_("head.group",
                  ConvSpec::group(profile_.stage_channels[3], profile_.head_channels, 1,
                                  profile_.head_groups),
                  ConvUnit::Post::bn_prelu, rng.split(3)),
      classifier_("classifier", profile_.head_channels, profile_.classes, true, rng.split(4)) {
  if (options_.design_extent % 32 != 0 || options_.design_extent == 0) {
    throw ConfigError("design extent must be a positive multiple of 32");
  }
  std::size_t in = profile_.stem_channels;
  stages_.resize(kLevels);
  for (std::size_t level = 0; level < kLevels; ++level) {
    const std::size_t out = profile_.stage_channels[level];
    const std::size_t extent = design_level_extent(options_, level);
    const std::string prefix = "level" + std::to_string(level + 2);
    std::optional<ShortcutConfig> shortcut;
    if (options_.input_shortcut) shortcut = ShortcutConfig{level + 2, 3, 3, out};
    down_.emplace_back(prefix + ".down", level_config(profile_, options_, in, out, true, extent),
                       shortcut, rng.split(100 + level));
    for (std::size_t r = 0; r < profile_.stage_repeats[level]; ++r) {
      stages_[level].emplace_back(prefix + ".eesp" + std::to_string(r + 1),
                                  level_config(profile_, options_, out, out, false, extent),
                                  rng.split(1000 + 100 * level + r));
    }
    in = out;
  }
}

ag::Var Network::forward(const ag::Var& x, Mode mode) {
  const Shape& s = x.shape();
  if (s.size() != 4 || s[1] != 3) {
    throw ShapeError("network expects [N, 3, H, W] input, got " + to_string(s));
  }
  if (s[2] % 32 != 0 || s[3] % 32 != 0) {
    throw ShapeError("input extents must be divisible by 32, got " + to_string(s));
  }
  ag::Var y = stem_.forward(x, mode);
  for (std::size_t level = 0; level < kLevels; ++level) {
    y = down_[level].forward(y, &x, mode);
    for (auto& unit : stages_[level]) y = unit.forward(y, mode);
  }
  y = head_depthwise_.forward(y, mode);
  y = head_group_.forward(y, mode);
  y = ag::global_avg_pool(y);
  return classifier_.forward(y);
}

Tensor Network::forward(const Tensor& x, Mode mode) {
  return forward(ag::Var::constant(x), mode).value();
}

ParameterList Network::parameters() const {
  ParameterList out;
  stem_.collect(out);
  for (std::size_t level = 0; level < kLevels; ++level) {
    down_[level].collect(out);
    for (const auto& unit : stages_[level]) unit.collect(out);
  }
  head_depthwise_.collect(out);
  head_group_.collect(out);
  classifier_.collect(out);
  return out;
}

std::vector<LayerRecord> Network::ledger(std::size_t in_h, std::size_t in_w) const {
  if (in_h % 32 != 0 || in_w % 32 != 0 || in_h == 0 || in_w == 0) {
    throw ShapeError("ledger: input extents must be positive multiples of 32");
  }
  std::vector<LayerRecord> rows;
  auto [h, w] = output_extent(stem_.spec(), in_h, in_w);
  rows.push_back(conv_record(stem_.name(), stem_.spec(), h, w));
  for (std::size_t level = 0; level < kLevels; ++level) {
    down_[level].describe(rows, h, w);
    h = (h - 1) / 2 + 1;
    w = (w - 1) / 2 + 1;
    for (const auto& unit : stages_[level]) unit.describe(rows, h, w);
  }
  rows.push_back(conv_record(head_depthwise_.name(), head_depthwise_.spec(), h, w));
  rows.push_back(conv_record(head_group_.name(), head_group_.spec(), h, w));
  rows.push_back(classifier_.record());
  return rows;
}

std::uint64_t Network::affine_params() const {
  std::uint64_t n = stem_.affine_params() + head_depthwise_.affine_params() +
                    head_group_.affine_params();
  for (std::size_t level = 0; level < kLevels; ++level) {
    n += down_[level].affine_params();
    for (const auto& unit : stages_[level]) n += unit.affine_params();
  }
  return n;
}

std::vector<Network::UnitInfo> Network::units() const {
  std::vector<UnitInfo> out;
  for (std::size_t level = 0; level < kLevels; ++level) {
    const std::size_t extent = design_level_extent(options_, level);
    auto info = [&](const std::string& name, const EespConfig& cfg, bool strided) {
      return UnitInfo{name,
                      level,
                      extent,
                      cfg.receptive_field_cap.value_or(0),
                      cfg.rates(),
                      cfg.in_channels,
                      cfg.out_channels,
                      strided};
    };
    out.push_back(info("level" + std::to_string(level + 2) + ".down", down_[level].config(),
                       true));
    for (std::size_t r = 0; r < stages_[level].size(); ++r) {
      out.push_back(info("level" + std::to_string(level + 2) + ".eesp" + std::to_string(r + 1),
                         stages_[level][r].config(), false));
    }
  }
  return out;
}

Network build_network(const NetworkProfile& profile, Rng rng, NetworkOptions options) {
  return Network(profile, options, rng);
}

}  // namespace eesp
