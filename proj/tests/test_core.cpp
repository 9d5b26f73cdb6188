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
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "eesp/autograd.hpp"
#include "eesp/conv.hpp"
#include "eesp/errors.hpp"
#include "eesp/loss.hpp"
#include "eesp/oracles.hpp"
#include "eesp/rng.hpp"
#include "eesp/tensor.hpp"
#include "eesp/tensor_ops.hpp"

namespace eesp {
namespace {

TEST(Tensor, ShapeAndIndexing) {
  Tensor t({2, 3, 4, 5});
  EXPECT_EQ(t.numel(), 120u);
  EXPECT_EQ(t.channels(), 3u);
  EXPECT_EQ(t.spatial_size(), 20u);
  t.at(1, 2, 3, 4) = 7.0;
  EXPECT_EQ(t[119], 7.0);
  EXPECT_THROW(Tensor({2, 2}, std::vector<double>(3)), ShapeError);
  EXPECT_THROW(t.reshaped({7}), ShapeError);
  EXPECT_EQ(t.reshaped({120})[119], 7.0);
}

TEST(Tensor, ElementwiseRejectsMismatch) {
  EXPECT_THROW(add(Tensor({2}), Tensor({3})), ShapeError);
  const Tensor a = Tensor::from({1, 2, 3});
  EXPECT_EQ(mul(a, a), Tensor::from({1, 4, 9}));
  EXPECT_EQ(scale(a, -2), Tensor::from({-2, -4, -6}));
}

TEST(Rng, DeterministicAndSplit) {
  Rng a(42), b(42);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
  EXPECT_NE(Rng(42).split(1).next_u64(), Rng(42).split(2).next_u64());
  // split depends on the seed only, not on draws already taken
  Rng c(42);
  c.next_u64();
  EXPECT_EQ(c.split(3).next_u64(), Rng(42).split(3).next_u64());
}

TEST(Rng, UniformAndNormalMoments) {
  Rng r(3);
  double s = 0, s2 = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double v = r.normal();
    s += v;
    s2 += v * v;
  }
  EXPECT_NEAR(s / n, 0.0, 0.03);
  EXPECT_NEAR(s2 / n, 1.0, 0.05);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_LT(r.below(7), 7u);
  }
}

TEST(Init, HeStd) {
  const Tensor w = he_init(50, {200, 50}, Rng(9));
  double s2 = 0;
  for (double v : w.data()) s2 += v * v;
  EXPECT_NEAR(s2 / static_cast<double>(w.numel()), 2.0 / 50.0, 0.003);
  EXPECT_THROW(he_init(0, {1}, Rng(1)), ConfigError);
}

TEST(Ops, PreluAndPools) {
  const Tensor x({1, 2, 1, 2}, {-2, 3, -4, 5});
  const Tensor y = prelu(x, Tensor::from({0.25, 0.5}));
  EXPECT_EQ(y, Tensor({1, 2, 1, 2}, {-0.5, 3, -2, 5}));
  const Tensor g = global_avg_pool(x);
  EXPECT_EQ(g.shape(), (Shape{1, 2}));
  EXPECT_DOUBLE_EQ(g[0], 0.5);
  EXPECT_EQ(avg_pool2d(Tensor({1, 1, 8, 8}, 1.0)).shape(), (Shape{1, 1, 4, 4}));
}

TEST(Ops, BatchNormTrainNormalises) {
  Rng r(5);
  const Tensor x = oracle::random_tensor({4, 3, 5, 5}, r);
  BatchNormState st(3);
  const Tensor y = batch_norm(x, Tensor({3}, 1.0), Tensor({3}, 0.0), st, Mode::train);
  for (std::size_t c = 0; c < 3; ++c) {
    double s = 0, s2 = 0;
    for (std::size_t n = 0; n < 4; ++n)
      for (std::size_t i = 0; i < 25; ++i) {
        const double v = y[(n * 3 + c) * 25 + i];
        s += v;
        s2 += v * v;
      }
    EXPECT_NEAR(s / 100, 0.0, 1e-12);
    EXPECT_NEAR(s2 / 100, 1.0, 1e-3);
  }
  EXPECT_GT(st.running_var[0], 0.0);
}

TEST(Conv, SpecFactoriesAndCounts) {
  const ConvSpec dw = ConvSpec::depthwise_dilated(16, 3, 2);
  EXPECT_EQ(dw.groups, 16u);
  EXPECT_EQ(dw.padding, 2u);
  EXPECT_EQ(dw.effective_kernel(), 5u);
  EXPECT_EQ(effective_receptive_field(3, 4), 9u);
  EXPECT_EQ(weight_count(ConvSpec::group(16, 32, 1, 4)), 16u * 32 / 4);
  EXPECT_EQ(mac_count(ConvSpec::standard(3, 8, 3, 2), 4, 4), 3u * 8 * 9 * 16);
  EXPECT_EQ(output_extent(ConvSpec::standard(3, 8, 3, 2), 224, 224),
            (std::pair<std::size_t, std::size_t>{112, 112}));
  EXPECT_THROW(validate(ConvSpec::group(6, 8, 1, 4)), SpecError);
}

TEST(Conv, SeparableReductionFrozen) {
  // n^2 c c' / (n^2 c + c c') for n=3, c=c'=64: 36864 / 4672
  const Ratio r = cost_reduction_separable(3, 64, 64);
  EXPECT_EQ(r.num, 9u * 64 * 64);
  EXPECT_EQ(r.den, 9u * 64 + 64u * 64);
  EXPECT_NEAR(r.value(), 7.890411, 1e-6);
}

TEST(Conv, MatchesNaiveOneD) {
  Rng r(11);
  const ConvSpec spec = ConvSpec::depthwise_dilated(4, 3, 3).with_rank(1);
  const ConvLayer layer = make_conv_layer(spec, r.split(1));
  const Tensor x = oracle::random_tensor({2, 4, 13}, r);
  const Tensor want = oracle::naive_conv(spec, layer.weights, nullptr, x);
  EXPECT_LE(max_abs_diff(conv_forward(layer, x), want), 1e-12);
  EXPECT_EQ(want.shape(), (Shape{2, 4, 13}));
}

TEST(Conv, BiasAndStrideAgainstNaive) {
  Rng r(12);
  const ConvSpec spec = ConvSpec::group(8, 12, 3, 4, 2, 2).with_bias();
  const ConvLayer layer = make_conv_layer(spec, r.split(1));
  const Tensor x = oracle::random_tensor({2, 8, 9, 10}, r);
  std::uint64_t macs = 0;
  const Tensor want = oracle::naive_conv(spec, layer.weights, &*layer.bias, x, &macs);
  EXPECT_LE(max_abs_diff(conv_forward(layer, x), want), 1e-12);
  EXPECT_LE(max_abs_diff(conv_forward_direct(layer, x), want), 1e-12);
  EXPECT_EQ(macs, 2 * mac_count(spec, want.dim(2), want.dim(3)));
}

TEST(Loss, UniformLogitsGiveLogClasses) {
  const Tensor logits({3, 4}, 0.0);
  const std::vector<int> labels{0, 1, 3};
  const LossResult ce = cross_entropy(logits, labels);
  EXPECT_NEAR(ce.loss, std::log(4.0), 1e-15);
  EXPECT_NEAR(ce.grad_logits[0], (0.25 - 1.0) / 3.0, 1e-15);
  const LossResult bce = binary_cross_entropy(Tensor({2, 2}, 0.0), Tensor({2, 2}, 1.0));
  EXPECT_NEAR(bce.loss, std::numbers::ln2, 1e-15);
}

TEST(Loss, StableForLargeLogits) {
  const Tensor logits({1, 2}, {1000.0, -1000.0});
  const std::vector<int> labels{1};
  const LossResult ce = cross_entropy(logits, labels);
  EXPECT_TRUE(std::isfinite(ce.loss));
  EXPECT_NEAR(ce.loss, 2000.0, 1e-9);
  EXPECT_TRUE(std::isfinite(binary_cross_entropy(logits, Tensor({1, 2}, {0.0, 1.0})).loss));
  EXPECT_THROW(cross_entropy(logits, std::vector<int>{2}), std::out_of_range);
}

TEST(Autograd, ChainRuleSmallGraph) {
  ag::Var a = ag::Var::leaf(Tensor::from({2.0}));
  ag::Var b = ag::Var::leaf(Tensor::from({3.0}));
  ag::Var y = ag::mul(ag::add(a, b), a);  // (a + b) a
  ag::backward(y);
  EXPECT_DOUBLE_EQ(a.grad()[0], 2 * 2.0 + 3.0);
  EXPECT_DOUBLE_EQ(b.grad()[0], 2.0);
}

TEST(Autograd, ConvBatchNormPreluGradCheck) {
  Rng r(21);
  const ConvSpec spec = ConvSpec::depthwise_dilated(4, 3, 2);
  ag::Var x = ag::Var::leaf(oracle::random_tensor({2, 4, 6, 6}, r));
  ag::Var w = ag::Var::leaf(oracle::random_tensor(spec.weight_shape(), r));
  ag::Var gamma = ag::Var::leaf(oracle::random_tensor({4}, r));
  ag::Var beta = ag::Var::leaf(oracle::random_tensor({4}, r));
  ag::Var slopes = ag::Var::leaf(Tensor({4}, 0.25));
  auto loss = [&] {
    BatchNormState st(4);
    ag::Var y = ag::conv(x, w, nullptr, spec);
    y = ag::batch_norm(y, gamma, beta, st, Mode::train);
    return oracle::random_projection(ag::prelu(y, slopes), 5);
  };
  for (ag::Var* v : {&x, &w, &gamma, &beta, &slopes}) {
    EXPECT_LT(oracle::check_gradient(loss, *v).rel_error, 1e-6);
  }
}

TEST(Autograd, CrossEntropyGradCheck) {
  Rng r(22);
  ag::Var logits = ag::Var::leaf(oracle::random_tensor({5, 3}, r));
  const std::vector<int> labels{0, 2, 1, 1, 0};
  auto loss = [&] { return ag::cross_entropy(logits, labels); };
  EXPECT_LT(oracle::check_gradient(loss, logits).rel_error, 1e-7);
}

}  // namespace
}  // namespace eesp
