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
#include <optional>
#include <string>
#include <vector>

#include "eesp/network.hpp"

namespace eesp {

/// Counting conventions. The defaults leave classifier MACs and every bias out
/// of the totals; classifier weights are always counted as parameters.
struct CostConventions {
  bool count_classifier = false;  // add FC multiply-adds to the MAC total
  bool count_bias = false;        // add conv / FC bias terms to the parameter total

  bool operator==(const CostConventions&) const = default;
};

struct CostRow {
  std::string name;
  std::string kind;
  std::size_t out_h = 1;
  std::size_t out_w = 1;
  std::uint64_t params = 0;
  std::uint64_t bias_params = 0;
  std::uint64_t macs = 0;
  bool classifier = false;

  bool operator==(const CostRow&) const = default;
};

struct CostTotals {
  std::uint64_t params = 0;
  std::uint64_t macs = 0;

  bool operator==(const CostTotals&) const = default;
};

/// Published figures and the percent deviation of the totals from them.
struct ReferenceDelta {
  double macs_millions = 0;    // published
  double params_millions = 0;  // published
  double macs_pct = 0;
  double params_pct = 0;

  bool operator==(const ReferenceDelta&) const = default;
};

struct ConventionTotals {
  CostConventions conventions;
  CostTotals totals;

  bool operator==(const ConventionTotals&) const = default;
};

struct CostReport {
  std::string profile;
  std::string arm;
  std::size_t input_extent = 224;
  std::vector<CostRow> rows;
  CostConventions conventions;
  CostTotals totals;  // under `conventions`
  /// Totals under all four convention combinations.
  std::vector<ConventionTotals> all_conventions;
  /// Batch-norm and PReLU parameters, reported separately.
  std::uint64_t affine_params = 0;
  std::optional<ReferenceDelta> reference;

  bool operator==(const CostReport&) const = default;
};

CostTotals sum_rows(const std::vector<CostRow>& rows, const CostConventions& conventions);

/// Per-layer ledger of `net` for an extent x extent input.
CostReport profile(const Network& net, std::size_t input_extent,
                   const CostConventions& conventions = {});

/// Builds the profile with its branch convolutions swapped for `arm` and
/// profiles it.
CostReport conv_swap_compare(const NetworkProfile& profile, ConvArm arm,
                             std::size_t input_extent = 224,
                             const CostConventions& conventions = {});

/// Three-arm convolution comparison. The separable arms are built at
/// `separable_profile`; the standard dilated arm at `dilated_profile`, whose
/// widths reproduce the published 478 M when given c86. The same-width ratio
/// (dilated arm at separable_profile widths) is reported alongside.
struct ConvSwapTable {
  CostReport dilated_standard;
  CostReport depthwise_separable;
  CostReport depthwise_dilated_separable;
  double matched_ratio = 0;     // dilated_standard MACs / separable MACs
  double same_width_ratio = 0;  // same, with both at separable_profile widths
};
ConvSwapTable conv_swap_table(const NetworkProfile& separable_profile,
                              const NetworkProfile& dilated_profile,
                              std::size_t input_extent = 224,
                              const CostConventions& conventions = {});

/// Totals computed straight from the block configurations, without building
/// a network or walking its ledger.
CostTotals recount(const NetworkProfile& profile, const NetworkOptions& options,
                   std::size_t input_extent, const CostConventions& conventions = {});

struct GriddingResult {
  std::size_t field = 0;     // side of the max-rate effective receptive field
  std::size_t nonzero = 0;   // responding cells inside that field
  double coverage = 0;       // nonzero / field^2
  std::vector<double> response;  // field x field, row-major
};

/// Impulse through single-channel 3x3 all-ones branches, one per rate. With
/// use_hff the fused (summed) response is measured, otherwise the max-rate
/// branch alone. Throws ConfigError for an empty or zero rate list.
GriddingResult gridding_probe(const std::vector<std::size_t>& rates, bool use_hff);

/// Union of the dilated tap offsets, counted independently of any
/// convolution code. Same field and coverage semantics as gridding_probe.
GriddingResult tap_union(const std::vector<std::size_t>& rates, bool use_hff);

}  // namespace eesp
