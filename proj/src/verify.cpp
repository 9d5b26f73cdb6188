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

#include "eesp/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>
#include <stdexcept>

#include "eesp/analysis.hpp"
#include "eesp/errors.hpp"
#include "eesp/loss.hpp"
#include "eesp/oracles.hpp"
#include "eesp/report.hpp"
#include "eesp/schedule.hpp"
#include "eesp/train.hpp"

namespace eesp::verify {

using oracle::random_tensor;

bool SuiteResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"tensor-core", "conv-oracle", "eesp",    "network",
                                              "analysis",    "schedule",    "eru"};
  return names;
}

namespace {

constexpr double kExact = 1e-12;
constexpr double kGradTol = 1e-4;

std::string num(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

template <class E, class F>
bool throws(F&& f) {
  try {
    f();
  } catch (const E&) {
    return true;
  } catch (...) {
    return false;
  }
  return false;
}

class Suite {
 public:
  explicit Suite(std::string name) { result_.suite = std::move(name); }

  /// fn returns {passed, detail}; an escaping exception is a failure.
  void check(std::string name, const std::function<std::pair<bool, std::string>()>& fn) {
    Check c;
    c.name = std::move(name);
    try {
      std::tie(c.passed, c.detail) = fn();
    } catch (const std::exception& e) {
      c.passed = false;
      c.detail = std::string("threw: ") + e.what();
    }
    result_.checks.push_back(std::move(c));
  }

  SuiteResult take(double seconds) {
    result_.seconds = seconds;
    return std::move(result_);
  }

 private:
  SuiteResult result_;
};

// ---------------------------------------------------------------------------
// shared helpers

ConvSpec random_spec(Rng& rng, std::size_t i) {
  const std::size_t kinds = 5;
  const std::size_t strides[] = {1, 2};
  const std::size_t dilations[] = {1, 2, 3};
  const std::size_t s = strides[(i / kinds) % 2];
  const std::size_t r = dilations[(i / (2 * kinds)) % 3];
  const std::size_t n = 1 + 2 * (1 + rng.below(2));  // 3 or 5
  const std::size_t g = 1 + rng.below(3);
  const std::size_t c = g * (1 + rng.below(3));
  const std::size_t co = g * (1 + rng.below(3));
  ConvSpec spec;
  switch (i % kinds) {
    case 0: spec = ConvSpec::standard(c, co, n, s, r); break;
    case 1: spec = ConvSpec::group(c, co, n, g, s, r); break;
    case 2: spec = ConvSpec::depthwise(c, n, s); break;
    case 3: spec = ConvSpec::depthwise_dilated(c, n, r, s); break;
    default:
      spec = ConvSpec::pointwise(c, co);
      spec.stride = s;
      break;
  }
  if (rng.below(3) == 0) spec = spec.with_bias();
  if (rng.below(4) == 0) spec = spec.with_rank(1);
  return spec;
}

Tensor random_input(const ConvSpec& spec, Rng& rng, std::size_t batch, std::size_t extent) {
  if (spec.spatial_rank == 1) return random_tensor({batch, spec.in_channels, extent}, rng);
  return random_tensor({batch, spec.in_channels, extent, extent + 1}, rng);
}

EespConfig small_eesp(Variant v, std::size_t M = 16, std::size_t N = 16) {
  EespConfig cfg;
  cfg.in_channels = M;
  cfg.out_channels = N;
  cfg.branches = 4;
  cfg.groups = 4;
  cfg.variant = v;
  cfg.receptive_field_cap = 9;
  cfg.residual = v != Variant::strided_eesp && M == N;
  return cfg;
}

}  // namespace

// ---------------------------------------------------------------------------
// building blocks

SweepStats conv_oracle_sweep(std::size_t cases, std::uint64_t seed) {
  SweepStats st;
  Rng rng(seed);
  std::set<std::size_t> strides, dilations;
  std::set<std::string> kinds;
  for (std::size_t i = 0; i < cases; ++i) {
    const ConvSpec spec = random_spec(rng, i);
    const ConvLayer layer = make_conv_layer(spec, rng.split(1000 + i));
    const std::size_t extent = spec.effective_kernel() + rng.below(4);
    const Tensor x = random_input(spec, rng, 1 + rng.below(2), extent);
    std::uint64_t taps = 0;
    const Tensor ref = oracle::naive_conv(spec, layer.weights, layer.bias ? &*layer.bias : nullptr,
                                          x, &taps);
    const Tensor fast = conv_forward(layer, x);
    const Tensor direct = conv_forward_direct(layer, x);
    st.max_abs_diff = std::max({st.max_abs_diff, max_abs_diff(ref, fast), max_abs_diff(ref, direct)});
    const std::size_t oh = spec.spatial_rank == 1 ? 1 : ref.dim(2);
    const std::size_t ow = ref.dim(ref.rank() - 1);
    if (mac_count(spec, oh, ow) * x.dim(0) != taps) st.macs_match = false;
    strides.insert(spec.stride);
    dilations.insert(spec.dilation);
    kinds.insert(to_string(spec.kind));
    ++st.cases;
  }
  st.strides.assign(strides.begin(), strides.end());
  st.dilations.assign(dilations.begin(), dilations.end());
  st.kinds.assign(kinds.begin(), kinds.end());
  return st;
}

SweepStats group_pointwise_sweep(std::size_t cases, std::uint64_t seed) {
  SweepStats st;
  Rng rng(seed);
  for (std::size_t i = 0; i < cases; ++i) {
    const std::size_t K = 2 + rng.below(4);
    const std::size_t d_in = 1 + rng.below(4), d_out = 1 + rng.below(4);
    const ConvSpec grouped = ConvSpec::group(K * d_in, K * d_out, 1, K);
    const Tensor w = random_tensor(grouped.weight_shape(), rng);
    const Tensor x = random_tensor({1 + rng.below(2), K * d_in, 2 + rng.below(4), 2 + rng.below(4)}, rng);
    const Tensor fused = conv_forward(grouped, w, nullptr, x);

    std::vector<Tensor> parts;
    const ConvSpec single = ConvSpec::pointwise(d_in, d_out);
    for (std::size_t k = 0; k < K; ++k) {
      std::vector<double> wk(w.data().begin() + static_cast<std::ptrdiff_t>(k * d_out * d_in),
                             w.data().begin() + static_cast<std::ptrdiff_t>((k + 1) * d_out * d_in));
      const Tensor xk = slice_channels(x, k * d_in, (k + 1) * d_in);
      parts.push_back(conv_forward(single, Tensor(single.weight_shape(), std::move(wk)), nullptr, xk));
    }
    st.max_abs_diff = std::max(st.max_abs_diff, max_abs_diff(fused, concat_channels(parts)));
    ++st.cases;
  }
  return st;
}

std::vector<NamedError> gradient_sweep(std::uint64_t seed) {
  std::vector<NamedError> out;
  Rng rng(seed);
  auto record = [&](std::string name, const oracle::GradCheck& g) {
    out.push_back({std::move(name), g.rel_error, g.checked});
  };

  // every conv kind, gradients for input, weights and bias
  const std::vector<std::pair<std::string, ConvSpec>> convs{
      {"standard", ConvSpec::standard(3, 4, 3, 2, 2).with_bias()},
      {"group", ConvSpec::group(4, 6, 3, 2, 1, 3)},
      {"depthwise", ConvSpec::depthwise(4, 3, 2)},
      {"depthwise_dilated", ConvSpec::depthwise_dilated(4, 3, 2)},
      {"pointwise", ConvSpec::pointwise(4, 5).with_bias()},
      {"group_1d", ConvSpec::group(4, 4, 3, 2, 1, 2).with_rank(1)},
  };
  for (const auto& [name, spec] : convs) {
    const ConvLayer layer = make_conv_layer(spec, rng.split(out.size() + 1));
    ag::Var x = ag::Var::leaf(random_input(spec, rng, 2, 7));
    ag::Var w = ag::Var::leaf(layer.weights);
    std::optional<ag::Var> b;
    if (layer.bias) b = ag::Var::leaf(random_tensor(layer.bias->shape(), rng));
    auto loss = [&, spec = spec] {
      return oracle::random_projection(ag::conv(x, w, b ? &*b : nullptr, spec), 5);
    };
    record("conv." + name + ".x", oracle::check_gradient(loss, x));
    record("conv." + name + ".w", oracle::check_gradient(loss, w));
    if (b) record("conv." + name + ".b", oracle::check_gradient(loss, *b));
  }

  // stride-1 blocks in train mode (batch statistics on the path)
  for (Variant v : {Variant::esp_baseline, Variant::eesp_a, Variant::eesp}) {
    EespUnit unit("u", small_eesp(v), rng.split(100 + static_cast<std::uint64_t>(v)));
    ag::Var x = ag::Var::leaf(random_tensor({2, 16, 6, 6}, rng));
    auto loss = [&] { return oracle::random_projection(unit.forward(x, Mode::train), 7); };
    const std::string p = "block." + to_string(v);
    record(p + ".x", oracle::check_gradient(loss, x));
    record(p + ".reduce.w", oracle::check_gradient(loss, unit.body().reduce().weights()));
    record(p + ".branch3.w", oracle::check_gradient(loss, unit.body().branches()[3].weights()));
    record(p + ".branch0.bn", oracle::check_gradient(loss, *unit.body().branches()[0].bn_scale()));
    if (!unit.body().projections().empty()) {
      record(p + ".project.w", oracle::check_gradient(loss, unit.body().projections()[0].weights()));
    }
    record(p + ".prelu", oracle::check_gradient(loss, unit.activation().slopes()));
  }

  {
    EespConfig cfg = small_eesp(Variant::strided_eesp, 8, 24);
    cfg.stride = 2;
    StridedEespUnit unit("s", cfg, ShortcutConfig{2, 3, 3, 24}, rng.split(200));
    ag::Var x = ag::Var::leaf(random_tensor({2, 8, 8, 8}, rng));
    ag::Var img = ag::Var::leaf(random_tensor({2, 3, 16, 16}, rng));
    auto loss = [&] { return oracle::random_projection(unit.forward(x, &img, Mode::train), 9); };
    record("strided.x", oracle::check_gradient(loss, x));
    record("strided.image", oracle::check_gradient(loss, img));
    record("strided.reduce.w", oracle::check_gradient(loss, unit.body().reduce().weights()));
    record("strided.shortcut.spatial.w",
           oracle::check_gradient(loss, unit.shortcut_spatial()->weights()));
    record("strided.shortcut.project.w",
           oracle::check_gradient(loss, unit.shortcut_project()->weights()));
  }

  {
    ag::Var logits = ag::Var::leaf(random_tensor({2, 5}, rng));
    const std::vector<int> labels{3, 0};
    record("cross_entropy",
           oracle::check_gradient([&] { return ag::cross_entropy(logits, labels); }, logits));
    Tensor targets({2, 5});
    targets[1] = 1;
    targets[7] = 1;
    record("binary_cross_entropy",
           oracle::check_gradient([&] { return ag::binary_cross_entropy(logits, targets); },
                                  logits));
  }

  {
    EruConfig cfg{8, 8, 4, 2, 4, 1};
    Eru eru(cfg, rng.split(300));
    std::vector<ag::Var> xs;
    for (int t = 0; t < 3; ++t) xs.push_back(ag::Var::leaf(random_tensor({2, 8}, rng)));
    auto loss = [&] {
      auto states = eru.initial_state(2);
      const auto hs = eru.unroll(xs, states);
      ag::Var total = oracle::random_projection(hs[0], 11);
      for (std::size_t t = 1; t < hs.size(); ++t) {
        total = ag::add(total, oracle::random_projection(hs[t], 11 + t));
      }
      return total;
    };
    EruCell& cell = eru.cells()[0];
    record("eru3.x0", oracle::check_gradient(loss, xs[0]));
    record("eru3.x2", oracle::check_gradient(loss, xs[2]));
    record("eru3.recurrent.w", oracle::check_gradient(loss, cell.recurrent_weights()));
    record("eru3.bias", oracle::check_gradient(loss, cell.bias()));
    record("eru3.eesp.reduce.w", oracle::check_gradient(loss, cell.eesp().body().reduce().weights()));
    record("eru3.eesp.branch.w",
           oracle::check_gradient(loss, cell.eesp().body().branches()[1].weights()));
  }
  return out;
}

double eesp_1d_vs_2d(std::uint64_t seed) {
  Rng rng(seed);
  EespConfig one = small_eesp(Variant::eesp, 8, 16);
  one.residual = false;
  one.spatial_rank = 1;
  one.receptive_field_cap = 9;
  EespConfig two = one;
  two.spatial_rank = 2;
  EespUnit u1("a", one, rng.split(1));
  EespUnit u2("b", two, rng.split(2));

  auto embed = [](ConvUnit& from, ConvUnit& to) {
    const Tensor& w1 = from.weights().value();
    Tensor& w2 = to.weights().mutable_value();
    std::fill(w2.data().begin(), w2.data().end(), 0.0);
    const std::size_t n = from.spec().kernel;
    const std::size_t rows = w1.numel() / n;
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t k = 0; k < n; ++k) w2[(r * n + n / 2) * n + k] = w1[r * n + k];
    }
  };
  embed(u1.body().reduce(), u2.body().reduce());
  for (std::size_t k = 0; k < u1.body().branches().size(); ++k) {
    embed(u1.body().branches()[k], u2.body().branches()[k]);
  }
  for (std::size_t k = 0; k < u1.body().projections().size(); ++k) {
    embed(u1.body().projections()[k], u2.body().projections()[k]);
  }

  const std::size_t L = 11;
  const Tensor x = random_tensor({2, 8, L}, rng);
  double worst = 0;
  for (Mode m : {Mode::eval, Mode::train}) {
    const Tensor y1 = u1.forward(x, m);
    const Tensor y2 = u2.forward(x.reshaped({2, 8, 1, L}), m);
    worst = std::max(worst, max_abs_diff(y1, y2.reshaped(y1.shape())));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// suites

namespace {

void tensor_core(Suite& s, std::uint64_t seed) {
  s.check("zero extent rejected", [] {
    return std::pair{throws<ShapeError>([] { Tensor({2, 0, 3}); }), std::string()};
  });
  s.check("rng streams reproducible", [seed] {
    Rng a(seed), b(seed);
    bool same = true;
    for (int i = 0; i < 100; ++i) same = same && a.normal() == b.normal();
    Rng c = Rng(seed).split(1), d = Rng(seed).split(2);
    return std::pair{same && c.next_u64() != d.next_u64(), std::string()};
  });
  s.check("he init std", [seed] {
    Rng rng(seed);
    const Tensor w = he_init(50, {20000}, rng);
    double sq = 0;
    for (double v : w.data()) sq += v * v;
    const double sd = std::sqrt(sq / static_cast<double>(w.numel()));
    const double want = std::sqrt(2.0 / 50.0);
    return std::pair{std::abs(sd - want) / want < 0.03, "std " + num(sd) + " vs " + num(want)};
  });
  s.check("batch norm normalises in train mode", [seed] {
    Rng rng(seed);
    Tensor x = random_tensor({4, 3, 5, 5}, rng);
    for (auto& v : x.data()) v = 3.0 * v + 2.0;
    BatchNormState st(3);
    const Tensor y = batch_norm(x, Tensor({3}, 1.0), Tensor({3}, 0.0), st, Mode::train, nullptr);
    double worst = 0;
    for (std::size_t c = 0; c < 3; ++c) {
      double m = 0, v = 0;
      for (std::size_t n = 0; n < 4; ++n)
        for (std::size_t i = 0; i < 25; ++i) m += y[(n * 3 + c) * 25 + i];
      m /= 100;
      for (std::size_t n = 0; n < 4; ++n)
        for (std::size_t i = 0; i < 25; ++i) v += std::pow(y[(n * 3 + c) * 25 + i] - m, 2);
      v /= 100;
      worst = std::max({worst, std::abs(m), std::abs(v - 1.0)});
    }
    return std::pair{worst < 1e-3, "worst moment error " + num(worst)};
  });
  s.check("concat / slice round trip", [seed] {
    Rng rng(seed);
    const Tensor a = random_tensor({2, 3, 4, 4}, rng), b = random_tensor({2, 5, 4, 4}, rng);
    const Tensor parts[] = {a, b};
    const Tensor c = concat_channels(parts);
    return std::pair{slice_channels(c, 0, 3) == a && slice_channels(c, 3, 8) == b, std::string()};
  });
  s.check("op gradients", [seed] {
    Rng rng(seed);
    double worst = 0;
    ag::Var x = ag::Var::leaf(random_tensor({3, 4, 6, 6}, rng));
    ag::Var scale = ag::Var::leaf(random_tensor({4}, rng));
    ag::Var shift = ag::Var::leaf(random_tensor({4}, rng));
    ag::Var slopes = ag::Var::leaf(random_tensor({4}, rng));
    BatchNormState st(4);
    auto bn = [&] {
      return oracle::random_projection(
          ag::prelu(ag::batch_norm(x, scale, shift, st, Mode::train), slopes), 3);
    };
    for (ag::Var* v : {&x, &scale, &shift, &slopes}) {
      worst = std::max(worst, oracle::check_gradient(bn, *v).rel_error);
    }
    auto pool = [&] { return oracle::random_projection(ag::avg_pool2d(x), 4); };
    worst = std::max(worst, oracle::check_gradient(pool, x).rel_error);
    ag::Var f = ag::Var::leaf(random_tensor({3, 6}, rng));
    ag::Var w = ag::Var::leaf(random_tensor({2, 6}, rng));
    ag::Var b = ag::Var::leaf(random_tensor({2}, rng));
    auto lin = [&] {
      return oracle::random_projection(ag::tanh(ag::sigmoid(ag::linear(f, w, &b))), 5);
    };
    for (ag::Var* v : {&f, &w, &b}) worst = std::max(worst, oracle::check_gradient(lin, *v).rel_error);
    return std::pair{worst < kGradTol, "worst rel error " + num(worst)};
  });
}

void conv_oracle(Suite& s, std::uint64_t seed) {
  s.check("five kinds match naive loop (120 cases)", [seed] {
    const SweepStats st = conv_oracle_sweep(120, seed);
    return std::pair{st.max_abs_diff <= kExact && st.kinds.size() == 5,
                     "max diff " + num(st.max_abs_diff)};
  });
  s.check("mac_count equals counted taps", [seed] {
    const SweepStats st = conv_oracle_sweep(40, seed + 1);
    return std::pair{st.macs_match, std::string()};
  });
  s.check("group point-wise == K point-wise (50 cases)", [seed] {
    const SweepStats st = group_pointwise_sweep(50, seed);
    return std::pair{st.max_abs_diff <= kExact, "max diff " + num(st.max_abs_diff)};
  });
  s.check("separable cost formulas", [] {
    const SeparableSpec sep = SeparableSpec::make(3, 32, 64, 2);
    const bool params = param_count(sep) == 9u * 32 + 32u * 64;
    const bool macs = mac_count(sep, 10, 10) == (9u * 32 + 32u * 64) * 100;
    const Ratio r = cost_reduction_separable(3, 32, 64);
    const bool ratio = r.num == 9u * 32 * 64 && r.den == 9u * 32 + 32u * 64;
    const bool same = param_count(SeparableSpec::make(3, 32, 64, 1)) == param_count(sep);
    return std::pair{params && macs && ratio && same, std::string()};
  });
  s.check("invalid specs rejected", [] {
    ConvSpec bad = ConvSpec::group(6, 8, 3, 4);
    ConvSpec even = ConvSpec::standard(3, 3, 3);
    even.kernel = 4;
    return std::pair{throws<SpecError>([&] { validate(bad); }) &&
                         throws<SpecError>([&] { validate(even); }),
                     std::string()};
  });
  s.check("conv gradients", [seed] {
    double worst = 0;
    for (const auto& e : gradient_sweep(seed)) {
      if (e.name.rfind("conv.", 0) == 0) worst = std::max(worst, e.rel_error);
    }
    return std::pair{worst < kGradTol, "worst rel error " + num(worst)};
  });
}

void eesp_suite(Suite& s, std::uint64_t seed) {
  s.check("ESP / EESP ratio, M=240 d=60 K=g=4", [] {
    const Ratio r = esp_vs_eesp_ratio(240, 60, 4, 4, 3);
    EespConfig esp = small_eesp(Variant::esp_baseline, 240, 240);
    EespConfig eesp = small_eesp(Variant::eesp, 240, 240);
    const double built = static_cast<double>(eesp_param_count(esp)) /
                         static_cast<double>(eesp_param_count(eesp));
    const bool ok = r.value() >= 6.5 && r.value() <= 7.5 &&
                    std::abs(built - r.value()) / r.value() < 0.01;
    return std::pair{ok, "formula " + num(r.value()) + ", built " + num(built)};
  });
  s.check("HFF prefix sums", [seed] {
    Rng rng(seed);
    std::vector<Tensor> b;
    for (int k = 0; k < 4; ++k) b.push_back(random_tensor({1, 2, 3, 3}, rng));
    const auto fused = hff_fuse(b);
    Tensor acc = b[0];
    double worst = max_abs_diff(fused[0], b[0]);
    for (int k = 1; k < 4; ++k) {
      acc = add(acc, b[k]);
      worst = std::max(worst, max_abs_diff(fused[k], acc));
    }
    return std::pair{worst == 0.0, std::string()};
  });
  s.check("strided unit widths M + K d, halved extent", [seed] {
    EespConfig cfg = small_eesp(Variant::strided_eesp, 8, 24);
    cfg.stride = 2;
    StridedEespUnit unit("s", cfg, ShortcutConfig{2, 3, 3, 24}, Rng(seed));
    Rng rng(seed);
    const Tensor x = random_tensor({1, 8, 8, 8}, rng), img = random_tensor({1, 3, 16, 16}, rng);
    const Tensor y = unit.forward(x, &img, Mode::eval);
    return std::pair{y.shape() == Shape{1, 24, 4, 4}, to_string(y.shape())};
  });
  s.check("shortcut extent mismatch rejected", [seed] {
    EespConfig cfg = small_eesp(Variant::strided_eesp, 8, 24);
    cfg.stride = 2;
    StridedEespUnit unit("s", cfg, ShortcutConfig{1, 3, 3, 24}, Rng(seed));
    const Tensor x({1, 8, 8, 8}), img({1, 3, 16, 16});
    return std::pair{throws<ShapeError>([&] { unit.forward(x, &img, Mode::eval); }),
                     std::string()};
  });
  s.check("rates clamped to the receptive cap", [] {
    const auto r = default_dilation_rates(4, 3, 7);
    return std::pair{r == std::vector<std::size_t>{1, 2, 3, 3}, std::string()};
  });
  s.check("bad configs rejected", [] {
    EespConfig odd = small_eesp(Variant::eesp, 16, 18);
    EespConfig narrow = small_eesp(Variant::strided_eesp, 16, 16);
    return std::pair{throws<ConfigError>([&] { validate(odd); }) &&
                         throws<ConfigError>([&] { validate(narrow); }),
                     std::string()};
  });
  s.check("block gradients", [seed] {
    double worst = 0;
    for (const auto& e : gradient_sweep(seed)) {
      if (e.name.rfind("block.", 0) == 0 || e.name.rfind("strided.", 0) == 0) {
        worst = std::max(worst, e.rel_error);
      }
    }
    return std::pair{worst < kGradTol, "worst rel error " + num(worst)};
  });
}

void network_suite(Suite& s, std::uint64_t seed) {
  s.check("receptive caps 56->13, 14->7, 7->5", [] {
    const bool ok = receptive_cap(56) == 13 && receptive_cap(28) == 9 && receptive_cap(14) == 7 &&
                    receptive_cap(7) == 5 && throws<ConfigError>([] { receptive_cap(6); });
    return std::pair{ok, std::string()};
  });
  s.check("cap non-decreasing", [] {
    bool ok = true;
    for (std::size_t z = 8; z < 400; ++z) ok = ok && receptive_cap(z) >= receptive_cap(z - 1);
    return std::pair{ok, std::string()};
  });
  s.check("spatial and channel ledger at 224", [seed] {
    bool ok = true;
    for (const auto& p : canonical_profiles()) {
      const Network net = build_network(p, Rng(seed));
      const auto rows = net.ledger(224, 224);
      ok = ok && rows.front().out_h == 112 && rows.front().out_channels == p.stem_channels;
      const std::size_t sides[] = {56, 28, 14, 7};
      for (std::size_t l = 0; l < 4; ++l) {
        const std::string prefix = "level" + std::to_string(l + 2) + ".down";
        for (const auto& r : rows) {
          if (r.name.rfind(prefix, 0) == 0 && r.name.find("reduce") == std::string::npos) {
            ok = ok && r.out_h == sides[l];
          }
        }
      }
      for (const auto& u : net.units()) ok = ok && u.out_channels == p.stage_channels[u.level];
      ok = ok && rows.back().out_channels == 1000;
    }
    return std::pair{ok, std::string()};
  });
  s.check("every rate within its level cap", [seed] {
    bool ok = true;
    for (const auto& p : canonical_profiles()) {
      for (const auto& u : build_network(p, Rng(seed)).units()) {
        for (auto r : u.rates) ok = ok && effective_receptive_field(3, r) <= u.cap;
      }
    }
    return std::pair{ok, std::string()};
  });
  s.check("parameters within 5% of reference", [seed] {
    double worst = 0;
    for (const auto& p : canonical_profiles()) {
      const CostReport r = profile(build_network(p, Rng(seed)), 224);
      worst = std::max(worst, std::abs(r.reference->params_pct));
    }
    return std::pair{worst <= 5.0, "worst delta " + num(worst) + "%"};
  });
  s.check("forward 2x3x64x64 -> [2,1000], batch equivariant", [seed] {
    NetworkOptions o;
    o.design_extent = 64;
    Network net = build_network(profile_by_name("c28"), Rng(seed), o);
    Rng rng(seed);
    const Tensor x = random_tensor({2, 3, 64, 64}, rng);
    const Tensor y = net.forward(x, Mode::eval);
    Tensor swapped(x.shape());
    const std::size_t per = x.numel() / 2;
    std::copy(x.data().begin() + per, x.data().end(), swapped.data().begin());
    std::copy(x.data().begin(), x.data().begin() + per, swapped.data().begin() + per);
    const Tensor z = net.forward(swapped, Mode::eval);
    double diff = 0;
    for (std::size_t i = 0; i < 1000; ++i) {
      diff = std::max({diff, std::abs(y[i] - z[1000 + i]), std::abs(y[1000 + i] - z[i])});
    }
    return std::pair{y.shape() == Shape{2, 1000} && all_finite(y) && diff <= kExact,
                     "swap diff " + num(diff)};
  });
  s.check("indivisible extent rejected", [seed] {
    Network net = build_network(profile_by_name("c28"), Rng(seed));
    return std::pair{throws<ShapeError>([&] { net.forward(Tensor({1, 3, 48, 40}), Mode::eval); }),
                     std::string()};
  });
}

void analysis_suite(Suite& s, std::uint64_t seed) {
  s.check("MACs within 10% of reference", [seed] {
    double worst = 0;
    for (const auto& p : canonical_profiles()) {
      const CostReport r = profile(build_network(p, Rng(seed)), 224);
      worst = std::max(worst, std::abs(r.reference->macs_pct));
    }
    return std::pair{worst <= 10.0, "worst delta " + num(worst) + "%"};
  });
  s.check("totals equal independent recount", [seed] {
    bool ok = true;
    for (const auto& p : canonical_profiles()) {
      for (bool cls : {false, true}) {
        const CostConventions c{cls, cls};
        ok = ok && profile(build_network(p, Rng(seed)), 224, c).totals == recount(p, {}, 224, c);
      }
    }
    return std::pair{ok, std::string()};
  });
  s.check("profiles strictly increasing", [seed] {
    CostTotals prev;
    bool ok = true;
    for (const auto& p : canonical_profiles()) {
      const CostTotals t = profile(build_network(p, Rng(seed)), 224).totals;
      ok = ok && t.params > prev.params && t.macs > prev.macs;
      prev = t;
    }
    return std::pair{ok, std::string()};
  });
  s.check("448 input: conv MACs x4, params unchanged", [seed] {
    const Network net = build_network(profile_by_name("c86"), Rng(seed));
    const CostReport a = profile(net, 224), b = profile(net, 448);
    bool ok = a.rows.size() == b.rows.size() && a.totals.params == b.totals.params;
    for (std::size_t i = 0; ok && i < a.rows.size(); ++i) {
      if (!a.rows[i].classifier) ok = b.rows[i].macs == 4 * a.rows[i].macs;
    }
    return std::pair{ok, std::string()};
  });
  s.check("separable arms identical, identity arm", [seed] {
    const NetworkProfile& p = profile_by_name("c123");
    const CostReport dws = conv_swap_compare(p, ConvArm::depthwise_separable);
    const CostReport dds = conv_swap_compare(p, ConvArm::depthwise_dilated_separable);
    const CostReport base = profile(build_network(p, Rng(seed)), 224);
    return std::pair{dws.totals == dds.totals && dds.totals == base.totals, std::string()};
  });
  s.check("dilated arm / separable arm MACs in [3.3, 4.5]", [] {
    const ConvSwapTable t = conv_swap_table(profile_by_name("c123"), profile_by_name("c86"));
    return std::pair{t.matched_ratio >= 3.3 && t.matched_ratio <= 4.5,
                     "ratio " + num(t.matched_ratio) + " (same widths " + num(t.same_width_ratio) +
                         ")"};
  });
  s.check("gridding probe matches tap union", [] {
    bool ok = gridding_probe({1}, false).coverage == 1.0 &&
              gridding_probe({4}, false).nonzero == 9 && gridding_probe({4}, false).field == 9;
    for (const auto& rates : std::vector<std::vector<std::size_t>>{{1, 2, 3, 4}, {1, 2}, {2, 4}, {3}}) {
      for (bool hff : {false, true}) {
        ok = ok && gridding_probe(rates, hff).nonzero == tap_union(rates, hff).nonzero;
      }
    }
    ok = ok && gridding_probe({1, 2, 3, 4}, true).coverage >= gridding_probe({4}, false).coverage;
    return std::pair{ok, std::string()};
  });
  s.check("JSON report round trip", [seed] {
    const CostReport r = profile(build_network(profile_by_name("c284"), Rng(seed)), 224);
    const nlohmann::json j = to_json(r);
    const CostReport back = cost_report_from_json(nlohmann::json::parse(j.dump()));
    return std::pair{back == r && to_json(back) == j, std::string()};
  });
}

void schedule_suite(Suite& s, std::uint64_t seed) {
  s.check("cyclic sequence (0.1, 0.5, T=5)", [] {
    const LrSchedule sch{0.1, 0.5, 5, {}, ScheduleMode::cyclic};
    const std::vector<double> want{0.5, 0.4, 0.3, 0.2, 0.1, 0.5, 0.4, 0.3, 0.2, 0.1};
    const auto got = lr_sequence(sch, 10);
    double worst = 0;
    for (std::size_t i = 0; i < want.size(); ++i) worst = std::max(worst, std::abs(got[i] - want[i]));
    return std::pair{worst <= kExact, "max diff " + num(worst)};
  });
  s.check("milestone halving", [] {
    const LrSchedule sch{0.1, 0.5, 5, {50, 100}, ScheduleMode::cyclic};
    const bool ok = lr_at(sch, 49) == (0.5 - 4 * 0.1) && lr_at(sch, 50) == 0.25 &&
                    lr_at(sch, 100) == 0.125 && lr_at(sch, 54) == (0.5 - 4 * 0.1) / 2;
    return std::pair{ok, std::string()};
  });
  s.check("periodic between milestones, cycle extremes", [] {
    const LrSchedule sch{0.05, 0.5, 7, {30}, ScheduleMode::cyclic};
    bool ok = true;
    for (std::size_t t = 0; t + 7 < 30; ++t) ok = ok && lr_at(sch, t) == lr_at(sch, t + 7);
    for (std::size_t start : {0u, 35u}) {
      const double f = start >= 30 ? 0.5 : 1.0;
      double hi = 0, lo = 1e9;
      for (std::size_t t = start; t < start + 7; ++t) {
        hi = std::max(hi, lr_at(sch, t));
        lo = std::min(lo, lr_at(sch, t));
      }
      ok = ok && std::abs(hi - 0.5 * f) < kExact && std::abs(lo - (0.5 - 6 * 0.05) * f) < kExact;
    }
    return std::pair{ok, std::string()};
  });
  s.check("invalid schedules rejected", [] {
    return std::pair{throws<ConfigError>([] { lr_at({0.2, 0.5, 5, {}, ScheduleMode::cyclic}, 0); }) &&
                         throws<ConfigError>([] { lr_at({0.1, 0.5, 0, {}, ScheduleMode::cyclic}, 0); }) &&
                         throws<ConfigError>([] { lr_at({0.1, 0.5, 5, {9, 3}, ScheduleMode::fixed}, 0); }),
                     std::string()};
  });
  s.check("sgd two-step unroll", [] {
    Tensor p = Tensor::from({1.0, -2.0}), v = Tensor::from({0.0, 0.0});
    const Tensor g1 = Tensor::from({0.5, 0.25}), g2 = Tensor::from({-1.0, 2.0});
    const double lr = 0.1, mu = 0.9, wd = 0.01;
    sgd_step(p, g1, v, lr, mu, wd);
    sgd_step(p, g2, v, lr, mu, wd);
    bool ok = true;
    const double p0[] = {1.0, -2.0}, a[] = {0.5, 0.25}, b[] = {-1.0, 2.0};
    for (int i = 0; i < 2; ++i) {
      const double v1 = a[i] + wd * p0[i];
      const double p1 = p0[i] - lr * v1;
      const double v2 = mu * v1 + b[i] + wd * p1;
      const double p2 = p1 - lr * v2;
      ok = ok && std::abs(p[static_cast<std::size_t>(i)] - p2) <= kExact;
    }
    return std::pair{ok, std::string()};
  });
  s.check("cross entropy of uniform logits is ln C", [] {
    const std::vector<int> labels{2};
    const LossResult r = cross_entropy(Tensor({1, 4}, 0.3), labels);
    return std::pair{std::abs(r.loss - std::log(4.0)) < kExact, num(r.loss)};
  });
  s.check("loss gradients", [seed] {
    double worst = 0;
    for (const auto& e : gradient_sweep(seed)) {
      if (e.name.find("entropy") != std::string::npos) worst = std::max(worst, e.rel_error);
    }
    return std::pair{worst < 1e-6, "worst rel error " + num(worst)};
  });
  s.check("toy training deterministic, lr recorded", [seed] {
    const Dataset d = make_bars_and_blobs(24, seed);
    const LrSchedule sch{0.02, 0.1, 3, {}, ScheduleMode::cyclic};
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 12;
    cfg.seed = seed;
    TinyEespNet a({}, Rng(seed)), b({}, Rng(seed));
    const History ha = train_toy(a, d, cfg, sch), hb = train_toy(b, d, cfg, sch);
    bool ok = ha == hb;
    for (const auto& r : ha) ok = ok && r.lr == lr_at(sch, r.epoch);
    return std::pair{ok, std::string()};
  });
}

void eru_suite(Suite& s, std::uint64_t seed) {
  s.check("1D unit equals 2D unit on [N,C,1,L]", [seed] {
    const double d = eesp_1d_vs_2d(seed);
    return std::pair{d <= kExact, "max diff " + num(d)};
  });
  s.check("L=1 collapses to centre taps", [seed] {
    const EruConfig cfg{16, 4, 4, 4, 4, 1};
    EruCell cell("c", cfg, 0, Rng(seed));
    const auto rates = cfg.eesp_config(0).rates();
    Rng rng(seed);
    const ag::Var x = ag::Var::constant(random_tensor({2, 16, 1}, rng));
    const Tensor before = cell.input_transform(x).value();
    for (auto& b : cell.eesp().body().branches()) {
      Tensor& w = b.weights().mutable_value();
      for (std::size_t i = 0; i < w.numel(); ++i) {
        if (i % 3 != 1) w[i] = 0.0;
      }
    }
    const Tensor after = cell.input_transform(x).value();
    const bool ok = cfg.length() == 1 &&
                    std::all_of(rates.begin(), rates.end(), [](auto r) { return r == 1; }) &&
                    max_abs_diff(before, after) == 0.0 && before.shape() == Shape{2, 16, 1};
    return std::pair{ok, std::string()};
  });
  s.check("zero params, zero input -> zero state", [seed] {
    const EruConfig cfg{8, 8, 4, 2, 4, 1};
    EruCell cell("c", cfg, 0, Rng(seed));
    for (auto& p : cell.parameters()) {
      Tensor& v = ag::Var(p.var).mutable_value();
      std::fill(v.data().begin(), v.data().end(), 0.0);
    }
    const ag::Var zero = ag::Var::constant(Tensor({2, 8}));
    const EruState st = cell.step(zero, {zero, zero});
    const bool ok = std::all_of(st.h.value().data().begin(), st.h.value().data().end(),
                                [](double v) { return v == 0.0; }) &&
                    std::all_of(st.c.value().data().begin(), st.c.value().data().end(),
                                [](double v) { return v == 0.0; });
    return std::pair{ok, std::string()};
  });
  s.check("forget=1, input=0 keeps the cell", [seed] {
    const EruConfig cfg{8, 8, 4, 2, 4, 1};
    EruCell cell("c", cfg, 0, Rng(seed));
    Tensor& b = cell.bias().mutable_value();
    for (std::size_t i = 0; i < 8; ++i) {
      b[i] = -1e3;     // input gate
      b[8 + i] = 1e3;  // forget gate
    }
    Rng rng(seed);
    const ag::Var x = ag::Var::constant(random_tensor({2, 8}, rng));
    const ag::Var h = ag::Var::constant(random_tensor({2, 8}, rng));
    const ag::Var c = ag::Var::constant(random_tensor({2, 8}, rng));
    const EruState st = cell.step(x, {h, c});
    const double d = max_abs_diff(st.c.value(), c.value());
    return std::pair{d <= kExact, "max diff " + num(d)};
  });
  s.check("|c_t| <= |c_{t-1}| + 1", [seed] {
    const EruConfig cfg{8, 8, 4, 2, 4, 2};
    Eru eru(cfg, Rng(seed));
    Rng rng(seed);
    auto states = eru.initial_state(3);
    bool ok = true;
    for (int t = 0; t < 6; ++t) {
      const auto prev = states;
      eru.step(ag::Var::constant(random_tensor({3, 8}, rng)), states);
      for (std::size_t l = 0; l < states.size(); ++l) {
        for (std::size_t i = 0; i < 24; ++i) {
          ok = ok && std::abs(states[l].c.value()[i]) <= std::abs(prev[l].c.value()[i]) + 1.0;
        }
      }
    }
    return std::pair{ok, std::string()};
  });
  s.check("fewer parameters than an LSTM", [] {
    const EruConfig cfg;
    const auto eru = eru_layer_param_count(cfg), lstm = lstm_param_count(400, 400);
    return std::pair{eru < lstm, std::to_string(eru) + " vs " + std::to_string(lstm)};
  });
  s.check("3-step unroll gradients", [seed] {
    double worst = 0;
    for (const auto& e : gradient_sweep(seed)) {
      if (e.name.rfind("eru3.", 0) == 0) worst = std::max(worst, e.rel_error);
    }
    return std::pair{worst < kGradTol, "worst rel error " + num(worst)};
  });
}

}  // namespace

std::vector<SuiteResult> run(std::string_view selector, std::uint64_t seed) {
  using Fn = void (*)(Suite&, std::uint64_t);
  const std::vector<std::pair<std::string, Fn>> table{
      {"tensor-core", tensor_core}, {"conv-oracle", conv_oracle}, {"eesp", eesp_suite},
      {"network", network_suite},   {"analysis", analysis_suite}, {"schedule", schedule_suite},
      {"eru", eru_suite}};
  std::vector<SuiteResult> out;
  for (const auto& [name, fn] : table) {
    if (selector != "all" && selector != name) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Suite suite(name);
    fn(suite, seed);
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    out.push_back(suite.take(dt.count()));
  }
  if (out.empty()) {
    throw std::invalid_argument("unknown suite '" + std::string(selector) +
                                "' (tensor-core, conv-oracle, eesp, network, analysis, "
                                "schedule, eru, all)");
  }
  return out;
}

}  // namespace eesp::verify
