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

#include <string>

#include "json.hpp"

#include "eesp/analysis.hpp"

namespace eesp {

inline constexpr int kReportSchemaVersion = 1;

nlohmann::json to_json(const CostReport& report);
/// Throws std::invalid_argument on a missing field or schema mismatch.
CostReport cost_report_from_json(const nlohmann::json& j);

/// Aligned table, one line per ledger row, totals and deltas at the bottom.
std::string to_text(const CostReport& report);
/// Header: layer,kind,out_h,out_w,params,macs
std::string to_csv(const CostReport& report);

nlohmann::json to_json(const ConvSwapTable& table);
std::string to_text(const ConvSwapTable& table);

/// Model description: ordered layer records of a network.
nlohmann::json describe_network(const Network& net, std::size_t input_extent);

}  // namespace eesp
