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

#include <cstdint>
#include <string>
#include <vector>

#include "eesp/network.hpp"
#include "eesp/schedule.hpp"

namespace eesp {

enum class LossKind { cross_entropy, binary_cross_entropy };

struct TrainConfig {
  std::size_t epochs = 8;
  std::size_t batch_size = 16;
  double momentum = 0.9;
  double weight_decay = 4e-5;
  std::uint64_t seed = 7;
  LossKind loss = LossKind::cross_entropy;
};

void validate(const TrainConfig& cfg);

/// Images [N, 3, S, S] with integer labels.
struct Dataset {
  Tensor images;
  std::vector<int> labels;
  std::size_t classes = 2;

  std::size_t size() const { return labels.size(); }
};

/// Two classes at S x S: class 0 is an oriented bar with a warm tint, class 1
/// a Gaussian blob with a cool tint. Positions, orientations and pixel noise
/// are random; the tint alone makes the set linearly separable.
Dataset make_bars_and_blobs(std::size_t count, std::uint64_t seed, std::size_t extent = 32);

/// Rows [begin, end) of a dataset.
Dataset take(const Dataset& data, std::size_t begin, std::size_t end);

/// stem 3x3/2 -> strided EESP (with image shortcut) -> EESP -> pool -> FC.
class TinyEespNet : public Classifier {
 public:
  struct Options {
    std::size_t stem = 16;
    std::size_t width = 32;
    std::size_t classes = 2;
    bool hff = true;
    bool input_shortcut = true;
  };
  TinyEespNet(Options options, Rng rng);

  ag::Var forward(const ag::Var& x, Mode mode) override;
  ParameterList parameters() const override;
  std::size_t classes() const override { return options_.classes; }

 private:
  Options options_;
  ConvUnit stem_;
  StridedEespUnit down_;
  EespUnit unit_;
  Linear classifier_;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double lr = 0;
  double loss = 0;      // mean training loss over the epoch
  double accuracy = 0;  // eval-mode accuracy on the training set after the epoch

  bool operator==(const EpochRecord&) const = default;
};

using History = std::vector<EpochRecord>;

/// Mini-batch SGD with lr_at(schedule, epoch). Batches are reshuffled every
/// epoch from cfg.seed. Throws TrainingError on a non-finite loss and
/// ConfigError when the classifier width differs from data.classes.
History train_toy(Classifier& model, const Dataset& data, const TrainConfig& cfg,
                  const LrSchedule& schedule);

double accuracy(Classifier& model, const Dataset& data, std::size_t batch_size = 64);

/// epoch,lr,loss,acc
std::string history_csv(const History& h);

}  // namespace eesp
