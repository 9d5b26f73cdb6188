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

#include "eesp/analysis.hpp"

#include <algorithm>
#include <stdexcept>

#include "eesp/errors.hpp"

namespace eesp {

CostTotals sum_rows(const std::vector<CostRow>& rows, const CostConventions& c) {
  CostTotals t;
  for (const auto& r : rows) {
    t.params += r.params;
    if (c.count_bias) t.params += r.bias_params;
    if (!r.classifier || c.count_classifier) t.macs += r.macs;
  }
  return t;
}

namespace {

std::vector<ConventionTotals> every_convention(const std::vector<CostRow>& rows) {
  std::vector<ConventionTotals> out;
  for (bool cls : {false, true}) {
    for (bool bias : {false, true}) {
      CostConventions c{cls, bias};
      out.push_back({c, sum_rows(rows, c)});
    }
  }
  return out;
}

}  // namespace

CostReport profile(const Network& net, std::size_t input_extent,
                   const CostConventions& conventions) {
  CostReport rep;
  rep.profile = net.profile().name;
  rep.arm = to_string(net.options().arm);
  rep.input_extent = input_extent;
  rep.conventions = conventions;
  for (const auto& rec : net.ledger(input_extent, input_extent)) {
    rep.rows.push_back(
        {rec.name, rec.type, rec.out_h, rec.out_w, rec.params, rec.bias_params, rec.macs,
         rec.classifier});
  }
  rep.totals = sum_rows(rep.rows, conventions);
  rep.all_conventions = every_convention(rep.rows);
  rep.affine_params = net.affine_params();

  // Published figures only describe the canonical widths at 224.
  const auto& canon = canonical_profiles();
  const bool canonical = std::any_of(canon.begin(), canon.end(), [&](const NetworkProfile& p) {
    return p.name == rep.profile && p.stage_channels == net.profile().stage_channels;
  });
  if (canonical && input_extent == 224 &&
      net.options().arm == ConvArm::depthwise_dilated_separable) {
    const ReferenceCost ref = reference_cost(rep.profile);
    ReferenceDelta d;
    d.macs_millions = ref.macs_millions;
    d.params_millions = ref.params_millions;
    d.macs_pct = 100.0 * (static_cast<double>(rep.totals.macs) / 1e6 - ref.macs_millions) /
                 ref.macs_millions;
    d.params_pct = 100.0 * (static_cast<double>(rep.totals.params) / 1e6 - ref.params_millions) /
                   ref.params_millions;
    rep.reference = d;
  }
  return rep;
}

CostReport conv_swap_compare(const NetworkProfile& p, ConvArm arm, std::size_t input_extent,
                             const CostConventions& conventions) {
  NetworkOptions o;
  o.arm = arm;
  const Network net = build_network(p, Rng(0), o);
  return profile(net, input_extent, conventions);
}

ConvSwapTable conv_swap_table(const NetworkProfile& separable_profile,
                              const NetworkProfile& dilated_profile, std::size_t input_extent,
                              const CostConventions& conventions) {
  ConvSwapTable t;
  t.dilated_standard =
      conv_swap_compare(dilated_profile, ConvArm::dilated_standard, input_extent, conventions);
  t.depthwise_separable = conv_swap_compare(separable_profile, ConvArm::depthwise_separable,
                                            input_extent, conventions);
  t.depthwise_dilated_separable = conv_swap_compare(
      separable_profile, ConvArm::depthwise_dilated_separable, input_extent, conventions);
  const double sep = static_cast<double>(t.depthwise_dilated_separable.totals.macs);
  t.matched_ratio = static_cast<double>(t.dilated_standard.totals.macs) / sep;
  const CostReport same =
      conv_swap_compare(separable_profile, ConvArm::dilated_standard, input_extent, conventions);
  t.same_width_ratio = static_cast<double>(same.totals.macs) / sep;
  return t;
}

CostTotals recount(const NetworkProfile& p, const NetworkOptions& o, std::size_t extent,
                   const CostConventions& c) {
  validate(p);
  if (extent == 0 || extent % 32 != 0) throw ShapeError("recount: extent must be k * 32");
  CostTotals t;
  auto add = [&](const ConvSpec& s, std::size_t side) {
    t.params += weight_count(s);
    if (c.count_bias && s.has_bias) t.params += s.out_channels;
    t.macs += weight_count(s) * side * side;
  };

  std::size_t side = extent / 2;
  add(ConvSpec::standard(3, p.stem_channels, 3, 2), side);
  std::size_t in = p.stem_channels;
  for (std::size_t level = 0; level < 4; ++level) {
    const std::size_t out = p.stage_channels[level];
    const std::size_t design = std::max<std::size_t>(1, o.design_extent >> (level + 2));
    auto cfg_for = [&](bool strided) {
      EespConfig cfg;
      cfg.in_channels = strided ? in : out;
      cfg.out_channels = out;
      cfg.branches = p.branches;
      cfg.groups = p.groups;
      cfg.hff = o.hff;
      cfg.receptive_field_cap = level_cap(design);
      cfg.stride = strided ? 2 : 1;
      const Variant body =
          o.arm == ConvArm::dilated_standard ? Variant::esp_baseline : Variant::eesp;
      cfg.variant = strided ? Variant::strided_eesp : body;
      cfg.strided_body = body;
      if (o.arm == ConvArm::depthwise_separable) cfg.dilation_rates.assign(p.branches, 1);
      return cfg;
    };
    // Inside a strided unit the reduce runs before the stride; everything
    // else lands on the halved grid.
    const EespConfig down = cfg_for(true);
    std::optional<ShortcutConfig> sc;
    if (o.input_shortcut) sc = ShortcutConfig{level + 2, 3, 3, out};
    const auto specs = unit_conv_specs(down, sc);
    add(specs.front(), side);
    side = (side - 1) / 2 + 1;
    for (std::size_t i = 1; i < specs.size(); ++i) add(specs[i], side);
    for (std::size_t r = 0; r < p.stage_repeats[level]; ++r) {
      for (const auto& s : unit_conv_specs(cfg_for(false))) add(s, side);
    }
    in = out;
  }
  add(ConvSpec::depthwise(p.stage_channels[3], 3), side);
  add(ConvSpec::group(p.stage_channels[3], p.head_channels, 1, p.head_groups), side);
  t.params += std::uint64_t{p.head_channels} * p.classes;
  if (c.count_bias) t.params += p.classes;
  if (c.count_classifier) t.macs += std::uint64_t{p.head_channels} * p.classes;
  return t;
}

namespace {

std::size_t max_rate(const std::vector<std::size_t>& rates) {
  if (rates.empty()) throw ConfigError("gridding probe: rate list is empty");
  for (auto r : rates) {
    if (r == 0) throw ConfigError("gridding probe: rates must be >= 1");
  }
  return *std::max_element(rates.begin(), rates.end());
}

GriddingResult finish(std::vector<double> response, std::size_t field) {
  GriddingResult g;
  g.field = field;
  g.nonzero = static_cast<std::size_t>(
      std::count_if(response.begin(), response.end(), [](double v) { return v != 0.0; }));
  g.coverage = static_cast<double>(g.nonzero) / static_cast<double>(field * field);
  g.response = std::move(response);
  return g;
}

}  // namespace

GriddingResult gridding_probe(const std::vector<std::size_t>& rates, bool use_hff) {
  const std::size_t rmax = max_rate(rates);
  const std::size_t field = effective_receptive_field(3, rmax);
  Tensor impulse({1, 1, field, field});
  impulse.at(0, 0, field / 2, field / 2) = 1.0;

  std::vector<Tensor> outputs;
  for (auto r : rates) {
    if (!use_hff && r != rmax) continue;
    const ConvSpec spec = ConvSpec::depthwise_dilated(1, 3, r);
    const Tensor ones(spec.weight_shape(), 1.0);
    outputs.push_back(conv_forward(spec, ones, nullptr, impulse));
    if (!use_hff) break;
  }
  const Tensor fused = use_hff ? hff_fuse(outputs).back() : outputs.front();
  return finish(fused.values(), field);
}

GriddingResult tap_union(const std::vector<std::size_t>& rates, bool use_hff) {
  const std::size_t rmax = max_rate(rates);
  const std::size_t field = effective_receptive_field(3, rmax);
  const long c = static_cast<long>(field / 2);
  std::vector<double> hit(field * field, 0.0);
  for (auto r : rates) {
    if (!use_hff && r != rmax) continue;
    for (long dy = -1; dy <= 1; ++dy) {
      for (long dx = -1; dx <= 1; ++dx) {
        const long y = c + dy * static_cast<long>(r), x = c + dx * static_cast<long>(r);
        hit[static_cast<std::size_t>(y) * field + static_cast<std::size_t>(x)] = 1.0;
      }
    }
  }
  return finish(std::move(hit), field);
}

}  // namespace eesp
