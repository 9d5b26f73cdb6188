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

#include "eesp/train.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "eesp/errors.hpp"

namespace eesp {

void validate(const TrainConfig& cfg) {
  if (cfg.epochs == 0) throw ConfigError("train: epochs must be >= 1");
  if (cfg.batch_size == 0) throw ConfigError("train: batch size must be >= 1");
  if (cfg.momentum < 0.0 || cfg.weight_decay < 0.0) {
    throw ConfigError("train: momentum and weight decay must be >= 0");
  }
}

Dataset make_bars_and_blobs(std::size_t count, std::uint64_t seed, std::size_t S) {
  if (count == 0 || S < 8) throw ConfigError("dataset: need count >= 1 and extent >= 8");
  Dataset d;
  d.classes = 2;
  d.images = Tensor({count, 3, S, S});
  d.labels.resize(count);
  Rng rng(seed);
  const std::array<std::array<double, 3>, 2> tint{{{0.9, 0.45, 0.2}, {0.2, 0.45, 0.9}}};
  const double s = static_cast<double>(S);
  for (std::size_t n = 0; n < count; ++n) {
    const int label = static_cast<int>(n % 2);
    d.labels[n] = label;
    const double cy = rng.uniform(0.3 * s, 0.7 * s);
    const double cx = rng.uniform(0.3 * s, 0.7 * s);
    const double theta = rng.uniform(0.0, std::numbers::pi);
    const double radius = rng.uniform(0.1 * s, 0.2 * s);
    const double dy = std::sin(theta), dx = std::cos(theta);
    for (std::size_t y = 0; y < S; ++y) {
      for (std::size_t x = 0; x < S; ++x) {
        const double py = static_cast<double>(y) - cy, px = static_cast<double>(x) - cx;
        double shape;
        if (label == 0) {
          // distance to a line through the centre, cut at 0.35 S along it
          const double along = py * dy + px * dx;
          const double across = -py * dx + px * dy;
          shape = std::abs(along) < 0.35 * s && std::abs(across) < 1.5 ? 1.0 : 0.0;
        } else {
          shape = std::exp(-(py * py + px * px) / (2.0 * radius * radius));
        }
        for (std::size_t c = 0; c < 3; ++c) {
          d.images.at(n, c, y, x) = shape * tint[label][c] + 0.1 * rng.normal();
        }
      }
    }
  }
  return d;
}

Dataset take(const Dataset& data, std::size_t begin, std::size_t end) {
  if (begin >= end || end > data.size()) throw std::out_of_range("take: bad row range");
  const std::size_t per = data.images.numel() / data.size();
  Shape shape = data.images.shape();
  shape[0] = end - begin;
  auto src = data.images.data();
  std::vector<double> values(src.begin() + static_cast<std::ptrdiff_t>(begin * per),
                             src.begin() + static_cast<std::ptrdiff_t>(end * per));
  Dataset out;
  out.images = Tensor(shape, std::move(values));
  out.labels.assign(data.labels.begin() + static_cast<std::ptrdiff_t>(begin),
                    data.labels.begin() + static_cast<std::ptrdiff_t>(end));
  out.classes = data.classes;
  return out;
}

namespace {

EespConfig tiny_config(const TinyEespNet::Options& o, bool strided) {
  EespConfig cfg;
  cfg.in_channels = strided ? o.stem : o.width;
  cfg.out_channels = o.width;
  cfg.branches = 4;
  cfg.groups = 4;
  cfg.hff = o.hff;
  cfg.stride = strided ? 2 : 1;
  cfg.variant = strided ? Variant::strided_eesp : Variant::eesp;
  // 8x8 maps after the strided unit
  cfg.receptive_field_cap = 7;
  return cfg;
}

std::optional<ShortcutConfig> tiny_shortcut(const TinyEespNet::Options& o) {
  if (!o.input_shortcut) return std::nullopt;
  return ShortcutConfig{2, 3, 3, o.width};
}

}  // namespace

TinyEespNet::TinyEespNet(Options o, Rng rng)
    : options_(o),
      stem_("stem", ConvSpec::standard(3, o.stem, 3, 2), ConvUnit::Post::bn_prelu, rng.split(1)),
      down_("down", tiny_config(o, true), tiny_shortcut(o), rng.split(2)),
      unit_("eesp", tiny_config(o, false), rng.split(3)),
      classifier_("classifier", o.width, o.classes, true, rng.split(4)) {}

ag::Var TinyEespNet::forward(const ag::Var& x, Mode mode) {
  ag::Var y = stem_.forward(x, mode);
  y = down_.forward(y, &x, mode);
  y = unit_.forward(y, mode);
  return classifier_.forward(ag::global_avg_pool(y));
}

ParameterList TinyEespNet::parameters() const {
  ParameterList out;
  stem_.collect(out);
  down_.collect(out);
  unit_.collect(out);
  classifier_.collect(out);
  return out;
}

namespace {

Tensor gather_images(const Tensor& images, std::span<const std::size_t> rows) {
  Shape shape = images.shape();
  const std::size_t per = images.numel() / shape[0];
  shape[0] = rows.size();
  std::vector<double> values;
  values.reserve(rows.size() * per);
  auto src = images.data();
  for (auto r : rows) {
    values.insert(values.end(), src.begin() + static_cast<std::ptrdiff_t>(r * per),
                  src.begin() + static_cast<std::ptrdiff_t>((r + 1) * per));
  }
  return Tensor(shape, std::move(values));
}

ag::Var loss_for(const ag::Var& logits, std::span<const int> labels, std::size_t classes,
                 LossKind kind) {
  if (kind == LossKind::cross_entropy) return ag::cross_entropy(logits, labels);
  Tensor targets({labels.size(), classes});
  for (std::size_t i = 0; i < labels.size(); ++i) {
    targets[i * classes + static_cast<std::size_t>(labels[i])] = 1.0;
  }
  return ag::binary_cross_entropy(logits, targets);
}

}  // namespace

double accuracy(Classifier& model, const Dataset& data, std::size_t batch_size) {
  std::size_t correct = 0;
  std::vector<std::size_t> rows;
  for (std::size_t begin = 0; begin < data.size(); begin += batch_size) {
    const std::size_t end = std::min(data.size(), begin + batch_size);
    rows.resize(end - begin);
    std::iota(rows.begin(), rows.end(), begin);
    const Tensor logits =
        model.forward(ag::Var::constant(gather_images(data.images, rows)), Mode::eval).value();
    const std::size_t C = logits.dim(1);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      auto row = logits.data().subspan(i * C, C);
      const auto best = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
      if (best == data.labels[begin + i]) ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

History train_toy(Classifier& model, const Dataset& data, const TrainConfig& cfg,
                  const LrSchedule& schedule) {
  validate(cfg);
  validate(schedule);
  if (model.classes() != data.classes) {
    throw ConfigError("train: classifier has " + std::to_string(model.classes()) +
                      " outputs, dataset has " + std::to_string(data.classes) + " classes");
  }
  Sgd opt(model.parameters(), cfg.momentum, cfg.weight_decay);
  Rng shuffle_rng = Rng(cfg.seed).split(17);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  History history;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = lr_at(schedule, epoch);
    // Fisher-Yates with the counter-based generator
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[shuffle_rng.below(i)]);
    }
    double loss_sum = 0;
    std::size_t seen = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
      // batch norm needs two samples; a trailing singleton is skipped
      if (end - begin < 2 && begin != 0) break;
      std::span<const std::size_t> rows(order.data() + begin, end - begin);
      std::vector<int> labels;
      for (auto r : rows) labels.push_back(data.labels[r]);

      opt.zero_grad();
      const ag::Var x = ag::Var::constant(gather_images(data.images, rows));
      const ag::Var loss = loss_for(model.forward(x, Mode::train), labels, data.classes, cfg.loss);
      const double value = loss.value()[0];
      if (!std::isfinite(value)) {
        throw TrainingError("train: non-finite loss at epoch " + std::to_string(epoch), epoch);
      }
      ag::backward(loss);
      opt.step(lr);
      loss_sum += value * static_cast<double>(rows.size());
      seen += rows.size();
    }
    history.push_back({epoch, lr, loss_sum / static_cast<double>(seen), accuracy(model, data)});
  }
  return history;
}

std::string history_csv(const History& h) {
  std::ostringstream os;
  os.precision(12);
  os << "epoch,lr,loss,acc\n";
  for (const auto& r : h) os << r.epoch << ',' << r.lr << ',' << r.loss << ',' << r.accuracy << '\n';
  return os.str();
}

}  // namespace eesp
