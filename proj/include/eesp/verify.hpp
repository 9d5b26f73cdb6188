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
#include <string_view>
#include <vector>

#include "eesp/eru.hpp"

namespace eesp::verify {

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SuiteResult {
  std::string suite;
  std::vector<Check> checks;
  double seconds = 0;

  bool passed() const;
};

/// tensor-core, conv-oracle, eesp, network, analysis, schedule, eru.
const std::vector<std::string>& suite_names();

/// Runs one suite, or every suite for "all". Throws std::invalid_argument for
/// an unknown name.
std::vector<SuiteResult> run(std::string_view selector, std::uint64_t seed = 1);

// Building blocks shared with the acceptance binary.

struct SweepStats {
  std::size_t cases = 0;
  double max_abs_diff = 0;
  std::vector<std::size_t> strides;    // distinct values exercised
  std::vector<std::size_t> dilations;  // distinct values exercised
  std::vector<std::string> kinds;
  bool macs_match = true;  // mac_count agreed with the oracle's tap count
};

/// Random specs of all five kinds, 1D and 2D, against the naive loop.
SweepStats conv_oracle_sweep(std::size_t cases, std::uint64_t seed);

/// One group point-wise conv with g = K versus K separate point-wise convs on
/// the matching channel slices. Returns the worst max-abs difference.
SweepStats group_pointwise_sweep(std::size_t cases, std::uint64_t seed);

struct NamedError {
  std::string name;
  double rel_error = 0;
  std::size_t checked = 0;
};

/// Reverse-mode versus central differences for every conv kind (and a 1D
/// conv), the ESP / EESP-A / EESP blocks, the strided EESP with shortcut,
/// the losses and a 3-step ERU unroll.
std::vector<NamedError> gradient_sweep(std::uint64_t seed);

/// A 1D EESP unit against the 2D unit run on [N, C, 1, L] with each length-3
/// kernel placed in the middle row of a 3x3 kernel. Max abs difference over
/// both modes.
double eesp_1d_vs_2d(std::uint64_t seed);

}  // namespace eesp::verify
