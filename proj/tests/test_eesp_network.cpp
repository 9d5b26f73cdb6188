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

#include <set>

#include <gtest/gtest.h>

#include "eesp/analysis.hpp"
#include "eesp/eesp_unit.hpp"
#include "eesp/errors.hpp"
#include "eesp/network.hpp"
#include "eesp/oracles.hpp"
#include "eesp/report.hpp"

namespace eesp {
namespace {

EespConfig block(Variant v, std::size_t M, std::size_t N) {
  EespConfig cfg;
  cfg.in_channels = M;
  cfg.out_channels = N;
  cfg.variant = v;
  cfg.receptive_field_cap = 9;
  cfg.residual = v != Variant::strided_eesp && M == N;
  return cfg;
}

TEST(Eesp, RatioFrozen) {
  // M=240, d=60, K=g=4, n=3
  const Ratio r = esp_vs_eesp_ratio(240, 60, 4, 4, 3);
  EXPECT_NEAR(r.value(), 7.142857, 1e-5);
  const double built =
      static_cast<double>(eesp_param_count(block(Variant::esp_baseline, 240, 240))) /
      static_cast<double>(eesp_param_count(block(Variant::eesp, 240, 240)));
  EXPECT_NEAR(built / r.value(), 1.0, 0.01);
}

TEST(Eesp, DefaultRates) {
  EXPECT_EQ(default_dilation_rates(4, 3, std::nullopt), (std::vector<std::size_t>{1, 2, 3, 4}));
  EXPECT_EQ(default_dilation_rates(4, 3, 7), (std::vector<std::size_t>{1, 2, 3, 3}));
  EXPECT_EQ(default_dilation_rates(4, 3, 5), (std::vector<std::size_t>{1, 2, 2, 2}));
}

TEST(Eesp, VariantsKeepShape) {
  Rng r(4);
  const Tensor x = oracle::random_tensor({2, 16, 8, 8}, r);
  for (Variant v : {Variant::esp_baseline, Variant::eesp_a, Variant::eesp}) {
    EespUnit unit("u", block(v, 16, 16), Rng(1));
    const Tensor y = unit.forward(x, Mode::eval);
    EXPECT_EQ(y.shape(), x.shape()) << to_string(v);
    EXPECT_TRUE(all_finite(y));
  }
}

TEST(Eesp, ProjectionCosts) {
  // K point-wise d x d projections weigh the same as one (K d)^2 / g conv when g == K
  EXPECT_EQ(eesp_param_count(block(Variant::eesp, 64, 64)),
            eesp_param_count(block(Variant::eesp_a, 64, 64)));
  EespConfig g2 = block(Variant::eesp, 64, 64);
  g2.groups = 2;
  EXPECT_EQ(eesp_param_count(g2) - eesp_param_count(block(Variant::eesp, 64, 64)),
            64u * 64 / 2 - 64u * 64 / 4 + 64u * 16 / 2 - 64u * 16 / 4);
  EXPECT_LT(eesp_param_count(block(Variant::eesp_a, 64, 64)),
            eesp_param_count(block(Variant::esp_baseline, 64, 64)));
}

TEST(Eesp, StridedHalvesAndWidens) {
  EespConfig cfg = block(Variant::strided_eesp, 16, 48);
  cfg.stride = 2;
  StridedEespUnit unit("s", cfg, ShortcutConfig{1, 3, 3, 48}, Rng(2));
  Rng r(3);
  const Tensor x = oracle::random_tensor({1, 16, 8, 8}, r);
  const Tensor img = oracle::random_tensor({1, 3, 8, 8}, r);
  EXPECT_EQ(unit.forward(x, &img, Mode::eval).shape(), (Shape{1, 48, 4, 4}));
  EXPECT_THROW(unit.forward(x, nullptr, Mode::eval), ShapeError);
  cfg.stride = 2;
  StridedEespUnit bare("b", cfg, std::nullopt, Rng(2));
  EXPECT_EQ(bare.forward(x, nullptr, Mode::eval).shape(), (Shape{1, 48, 4, 4}));
}

TEST(Eesp, HffAddsNoParameters) {
  EespConfig a = block(Variant::eesp, 32, 32), b = a;
  b.hff = false;
  EXPECT_EQ(eesp_param_count(a), eesp_param_count(b));
}

TEST(Network, ReceptiveCapFrozen) {
  EXPECT_EQ(receptive_cap(56), 13u);
  EXPECT_EQ(receptive_cap(28), 9u);
  EXPECT_EQ(receptive_cap(14), 7u);
  EXPECT_EQ(receptive_cap(7), 5u);
  EXPECT_THROW(receptive_cap(6), ConfigError);
  EXPECT_EQ(level_cap(4), 3u);
  EXPECT_EQ(level_cap(5), 5u);
}

TEST(Network, ProfilesAndLookup) {
  EXPECT_EQ(canonical_profiles().size(), 6u);
  EXPECT_EQ(profile_by_name("c123").stage_channels[0], 80u);
  EXPECT_THROW(profile_by_name("c100"), std::invalid_argument);
  EXPECT_EQ(conv_arm_from_string("depthwise_separable"), ConvArm::depthwise_separable);
  EXPECT_THROW(conv_arm_from_string("x"), std::invalid_argument);
}

TEST(Network, ForwardSmallInput) {
  NetworkProfile p = profile_by_name("c28");
  p.classes = 10;
  Network net = build_network(p, Rng(1));
  Rng r(2);
  const ag::Var x = ag::Var::constant(oracle::random_tensor({1, 3, 64, 64}, r));
  const Tensor y = net.forward(x, Mode::eval).value();
  EXPECT_EQ(y.shape(), (Shape{1, 10}));
  EXPECT_TRUE(all_finite(y));
  EXPECT_THROW(net.forward(ag::Var::constant(Tensor({1, 3, 60, 64})), Mode::eval), ShapeError);
  EXPECT_THROW(net.forward(ag::Var::constant(Tensor({1, 1, 64, 64})), Mode::eval), ShapeError);
}

TEST(Network, UnitNamesAndCaps) {
  const Network net = build_network(profile_by_name("c86"), Rng(1));
  std::set<std::string> names;
  for (const auto& u : net.units()) {
    names.insert(u.name);
    for (auto r : u.rates) EXPECT_LE(2 * r + 1, u.cap) << u.name;
  }
  EXPECT_TRUE(names.count("level2.down"));
  EXPECT_TRUE(names.count("level4.eesp6"));
  EXPECT_EQ(net.units().size(), 4u + 3 + 7 + 3);
}

TEST(Analysis, C28TotalsFrozen) {
  const CostReport r = profile(build_network(profile_by_name("c28"), Rng(1)), 224);
  EXPECT_EQ(r.totals.params, 1220820u);
  EXPECT_EQ(r.totals.macs, 28417109u);
  ASSERT_TRUE(r.reference.has_value());
  EXPECT_NEAR(r.reference->params_pct, -1.55, 0.01);
  EXPECT_NEAR(r.reference->macs_pct, 1.49, 0.01);
  EXPECT_EQ(r.all_conventions.size(), 4u);
}

TEST(Analysis, ConventionsChangeTotals) {
  const Network net = build_network(profile_by_name("c28"), Rng(1));
  const CostReport base = profile(net, 224);
  const CostReport cls = profile(net, 224, {true, false});
  const CostReport bias = profile(net, 224, {false, true});
  EXPECT_EQ(cls.totals.macs - base.totals.macs, 1024u * 1000);
  EXPECT_EQ(bias.totals.params - base.totals.params, 1000u);
  EXPECT_FALSE(profile(net, 256).reference.has_value());
}

TEST(Analysis, RecountMatchesLedger) {
  for (const auto& p : canonical_profiles()) {
    const CostReport built = profile(build_network(p, Rng(3)), 224);
    EXPECT_EQ(recount(p, {}, 224), built.totals) << p.name;
  }
}

TEST(Analysis, GriddingFrozen) {
  const auto plain = gridding_probe({1, 2, 3, 4}, false);
  const auto fused = gridding_probe({1, 2, 3, 4}, true);
  EXPECT_EQ(plain.field, 9u);
  EXPECT_EQ(plain.nonzero, 9u);
  EXPECT_EQ(fused.nonzero, 33u);
  EXPECT_DOUBLE_EQ(fused.coverage, 33.0 / 81.0);
  EXPECT_EQ(tap_union({1, 2, 3, 4}, true).nonzero, 33u);
}

TEST(Report, JsonRoundTrip) {
  const CostReport r = profile(build_network(profile_by_name("c28"), Rng(1)), 224);
  const auto j = to_json(r);
  EXPECT_EQ(j.at("schema_version"), kReportSchemaVersion);
  EXPECT_EQ(cost_report_from_json(j), r);
  auto broken = j;
  broken["schema_version"] = 99;
  EXPECT_THROW(cost_report_from_json(broken), std::invalid_argument);
  EXPECT_EQ(to_csv(r).substr(0, 34), "layer,kind,out_h,out_w,params,macs");
}

}  // namespace
}  // namespace eesp
