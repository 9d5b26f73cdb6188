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

#include <cmath>

#include <gtest/gtest.h>

#include "eesp/errors.hpp"
#include "eesp/eru.hpp"
#include "eesp/oracles.hpp"
#include "eesp/schedule.hpp"
#include "eesp/train.hpp"

namespace eesp {
namespace {

TEST(Schedule, CyclicFrozen) {
  const LrSchedule s{};  // 0.1, 0.5, T=5
  const std::vector<double> want{0.5, 0.4, 0.3, 0.2, 0.1, 0.5, 0.4, 0.3, 0.2, 0.1};
  const auto got = lr_sequence(s, 10);
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t t = 0; t < want.size(); ++t) EXPECT_NEAR(got[t], want[t], 1e-12) << t;
}

TEST(Schedule, MilestonesHalve) {
  LrSchedule s{};
  s.milestones = {5, 8};
  EXPECT_NEAR(lr_at(s, 4), 0.1, 1e-12);
  EXPECT_NEAR(lr_at(s, 5), 0.25, 1e-12);
  EXPECT_NEAR(lr_at(s, 8), 0.05, 1e-12);
  // fixed keeps the initial rate eta_max
  s.mode = ScheduleMode::fixed;
  EXPECT_NEAR(lr_at(s, 0), 0.5, 1e-12);
  EXPECT_NEAR(lr_at(s, 9), 0.125, 1e-12);
}

TEST(Schedule, Validation) {
  EXPECT_THROW(validate(LrSchedule{0.0, 0.5, 5, {}, ScheduleMode::cyclic}), ConfigError);
  EXPECT_THROW(validate(LrSchedule{0.2, 0.1, 5, {}, ScheduleMode::cyclic}), ConfigError);
  EXPECT_THROW(validate(LrSchedule{0.1, 0.5, 0, {}, ScheduleMode::cyclic}), ConfigError);
  EXPECT_THROW(validate(LrSchedule{0.1, 0.5, 5, {4, 4}, ScheduleMode::cyclic}), ConfigError);
  // last step of the cycle would reach zero
  EXPECT_THROW(validate(LrSchedule{0.1, 0.4, 5, {}, ScheduleMode::cyclic}), ConfigError);
  EXPECT_NO_THROW(validate(LrSchedule{0.1, 0.4, 5, {}, ScheduleMode::fixed}));
  EXPECT_THROW(schedule_mode_from_string("step"), std::invalid_argument);
}

TEST(Sgd, StepFrozen) {
  ag::Var p = ag::Var::leaf(Tensor::from({1.0}));
  Tensor v = Tensor::from({0.0});
  // g = 2, wd = 0.1: g' = 2.1; v = 0.9*0 + 2.1; p = 1 - 0.5 * 2.1
  sgd_step(p.mutable_value(), Tensor::from({2.0}), v, 0.5, 0.9, 0.1);
  EXPECT_NEAR(p.value()[0], 1.0 - 0.5 * 2.1, 1e-15);
  sgd_step(p.mutable_value(), Tensor::from({0.0}), v, 0.5, 0.9, 0.0);
  EXPECT_NEAR(v[0], 0.9 * 2.1, 1e-15);
  EXPECT_THROW(sgd_step(p.mutable_value(), Tensor({2}), v, 0.5, 0.9, 0.0), ShapeError);
}

TEST(Train, DatasetBalancedAndDeterministic) {
  const Dataset a = make_bars_and_blobs(20, 3), b = make_bars_and_blobs(20, 3);
  EXPECT_EQ(a.images, b.images);
  int ones = 0;
  for (int l : a.labels) ones += l;
  EXPECT_EQ(ones, 10);
  EXPECT_EQ(take(a, 4, 9).size(), 5u);
  EXPECT_THROW(take(a, 5, 5), std::out_of_range);
}

TEST(Train, ClassMismatchRejected) {
  TinyEespNet::Options o;
  o.classes = 3;
  TinyEespNet net(o, Rng(1));
  EXPECT_THROW(train_toy(net, make_bars_and_blobs(8, 1), TrainConfig{}, LrSchedule{}), ConfigError);
}

TEST(Train, DivergenceRaises) {
  TinyEespNet net({}, Rng(1));
  TrainConfig cfg;
  cfg.epochs = 3;
  // absurd rate blows the logits up
  const LrSchedule s{1e6, 1e6, 1, {}, ScheduleMode::fixed};
  try {
    train_toy(net, make_bars_and_blobs(32, 1), cfg, s);
    FAIL() << "expected TrainingError";
  } catch (const TrainingError& e) {
    EXPECT_GE(e.epoch(), 0);
  }
}

TEST(Train, ShortRunLearnsAndRepeats) {
  const Dataset d = make_bars_and_blobs(64, 5);
  TrainConfig cfg;
  cfg.epochs = 3;
  const LrSchedule s{0.02, 0.1, 5, {}, ScheduleMode::cyclic};
  TinyEespNet a({}, Rng(2)), b({}, Rng(2));
  const History ha = train_toy(a, d, cfg, s), hb = train_toy(b, d, cfg, s);
  EXPECT_EQ(ha, hb);
  EXPECT_LT(ha.back().loss, ha.front().loss);
  EXPECT_EQ(history_csv(ha).substr(0, 18), "epoch,lr,loss,acc\n");
}

TEST(Eru, LayoutAndCountsFrozen) {
  const EruConfig cfg{};
  EXPECT_EQ(cfg.length(), 10u);  // 4 * 400 / (4 * 40)
  EXPECT_EQ(lstm_param_count(400, 400), 1281600u);
  EXPECT_EQ(eru_layer_param_count(cfg), 649960u);
  EXPECT_LT(eru_layer_param_count(cfg), lstm_param_count(400, 400));
  EruConfig bad = cfg;
  bad.branch_width = 30;  // 1600 not divisible by 120
  EXPECT_THROW(validate(bad), ConfigError);
}

TEST(Eru, CountDecomposes) {
  EruConfig cfg;
  cfg.embed_dim = 32;
  cfg.hidden_dim = 32;
  cfg.branch_width = 8;
  EruCell cell("c", cfg, 0, Rng(1));
  std::uint64_t conv = 0, affine = 0;
  for (const auto& p : cell.eesp().parameters()) {
    const bool is_affine =
        p.name.find(".bn.") != std::string::npos || p.name.find(".prelu") != std::string::npos;
    (is_affine ? affine : conv) += p.var.value().numel();
  }
  EXPECT_EQ(conv, eesp_param_count(cfg.eesp_config(0)));
  // gates: recurrent [4H, H] plus one bias [4H]
  EXPECT_EQ(eru_layer_param_count(cfg), conv + affine + 4u * 32 * 32 + 4u * 32);
}

TEST(Eru, UnrollShapesAndGradient) {
  EruConfig cfg;
  cfg.embed_dim = 16;
  cfg.hidden_dim = 16;
  cfg.branch_width = 4;
  cfg.layers = 2;
  Eru eru(cfg, Rng(3));
  Rng r(4);
  std::vector<ag::Var> xs;
  for (int t = 0; t < 3; ++t) xs.push_back(ag::Var::leaf(oracle::random_tensor({2, 16}, r)));
  auto loss = [&] {
    auto st = eru.initial_state(2);
    const auto hs = eru.unroll(xs, st);
    ag::Var total = oracle::random_projection(hs[0], 1);
    for (std::size_t t = 1; t < hs.size(); ++t) {
      total = ag::add(total, oracle::random_projection(hs[t], t + 1));
    }
    return total;
  };
  auto st = eru.initial_state(2);
  const auto hs = eru.unroll(xs, st);
  ASSERT_EQ(hs.size(), 3u);
  EXPECT_EQ(hs[2].shape(), (Shape{2, 16}));
  EXPECT_LT(oracle::check_gradient(loss, xs[0]).rel_error, 1e-6);
  EXPECT_LT(oracle::check_gradient(loss, eru.cells()[1].recurrent_weights()).rel_error, 1e-6);
}

}  // namespace
}  // namespace eesp
