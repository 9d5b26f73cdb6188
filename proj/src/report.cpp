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

#include "eesp/report.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace eesp {

using nlohmann::json;

namespace {

json conventions_json(const CostConventions& c) {
  return {{"count_classifier", c.count_classifier}, {"count_bias", c.count_bias}};
}

CostConventions conventions_from(const json& j) {
  return {j.at("count_classifier").get<bool>(), j.at("count_bias").get<bool>()};
}

json totals_json(const CostTotals& t) { return {{"params", t.params}, {"macs", t.macs}}; }

CostTotals totals_from(const json& j) {
  return {j.at("params").get<std::uint64_t>(), j.at("macs").get<std::uint64_t>()};
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

json to_json(const CostReport& r) {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["kind"] = "cost_report";
  j["profile"] = r.profile;
  j["arm"] = r.arm;
  j["input_extent"] = r.input_extent;
  j["conventions"] = conventions_json(r.conventions);
  j["totals"] = totals_json(r.totals);
  j["affine_params"] = r.affine_params;
  json all = json::array();
  for (const auto& ct : r.all_conventions) {
    all.push_back({{"conventions", conventions_json(ct.conventions)},
                   {"totals", totals_json(ct.totals)}});
  }
  j["all_conventions"] = all;
  if (r.reference) {
    j["reference"] = {{"macs_millions", r.reference->macs_millions},
                      {"params_millions", r.reference->params_millions},
                      {"macs_delta_pct", r.reference->macs_pct},
                      {"params_delta_pct", r.reference->params_pct}};
  } else {
    j["reference"] = nullptr;
  }
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"layer", row.name},
                    {"kind", row.kind},
                    {"out_h", row.out_h},
                    {"out_w", row.out_w},
                    {"params", row.params},
                    {"bias_params", row.bias_params},
                    {"macs", row.macs},
                    {"classifier", row.classifier}});
  }
  j["rows"] = rows;
  return j;
}

CostReport cost_report_from_json(const json& j) {
  try {
    if (j.at("schema_version").get<int>() != kReportSchemaVersion) {
      throw std::invalid_argument("unsupported schema_version");
    }
    CostReport r;
    r.profile = j.at("profile").get<std::string>();
    r.arm = j.at("arm").get<std::string>();
    r.input_extent = j.at("input_extent").get<std::size_t>();
    r.conventions = conventions_from(j.at("conventions"));
    r.totals = totals_from(j.at("totals"));
    r.affine_params = j.at("affine_params").get<std::uint64_t>();
    for (const auto& ct : j.at("all_conventions")) {
      r.all_conventions.push_back(
          {conventions_from(ct.at("conventions")), totals_from(ct.at("totals"))});
    }
    if (!j.at("reference").is_null()) {
      const json& d = j.at("reference");
      r.reference = ReferenceDelta{d.at("macs_millions").get<double>(),
                                   d.at("params_millions").get<double>(),
                                   d.at("macs_delta_pct").get<double>(),
                                   d.at("params_delta_pct").get<double>()};
    }
    for (const auto& row : j.at("rows")) {
      r.rows.push_back({row.at("layer").get<std::string>(), row.at("kind").get<std::string>(),
                        row.at("out_h").get<std::size_t>(), row.at("out_w").get<std::size_t>(),
                        row.at("params").get<std::uint64_t>(),
                        row.at("bias_params").get<std::uint64_t>(),
                        row.at("macs").get<std::uint64_t>(), row.at("classifier").get<bool>()});
    }
    return r;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed cost report: ") + e.what());
  }
}

std::string to_text(const CostReport& r) {
  std::ostringstream os;
  char line[256];
  os << "profile " << r.profile << "  arm " << r.arm << "  input " << r.input_extent << "x"
     << r.input_extent << "\n";
  std::snprintf(line, sizeof line, "%-28s %-18s %9s %12s %14s\n", "layer", "kind", "output",
                "params", "macs");
  os << line;
  for (const auto& row : r.rows) {
    const std::string out = std::to_string(row.out_h) + "x" + std::to_string(row.out_w);
    std::snprintf(line, sizeof line, "%-28s %-18s %9s %12llu %14llu\n", row.name.c_str(),
                  row.kind.c_str(), out.c_str(), static_cast<unsigned long long>(row.params),
                  static_cast<unsigned long long>(row.macs));
    os << line;
  }
  os << "total params " << r.totals.params << " (" << fmt("%.3f", r.totals.params / 1e6)
     << " M), macs " << r.totals.macs << " (" << fmt("%.1f", r.totals.macs / 1e6) << " M)"
     << "  [classifier macs " << (r.conventions.count_classifier ? "on" : "off") << ", bias "
     << (r.conventions.count_bias ? "on" : "off") << "]\n";
  os << "bn/prelu params (not in totals) " << r.affine_params << "\n";
  for (const auto& ct : r.all_conventions) {
    os << "  classifier=" << ct.conventions.count_classifier
       << " bias=" << ct.conventions.count_bias << ": params " << ct.totals.params << ", macs "
       << ct.totals.macs << "\n";
  }
  if (r.reference) {
    const ReferenceCost ref = reference_cost(r.profile);
    os << "reference " << fmt("%.0f", ref.macs_millions) << " M macs ("
       << fmt("%+.2f", r.reference->macs_pct) << "%), " << fmt("%.2f", ref.params_millions)
       << " M params (" << fmt("%+.2f", r.reference->params_pct) << "%)\n";
  }
  return os.str();
}

std::string to_csv(const CostReport& r) {
  std::ostringstream os;
  os << "layer,kind,out_h,out_w,params,macs\n";
  for (const auto& row : r.rows) {
    os << row.name << ',' << row.kind << ',' << row.out_h << ',' << row.out_w << ','
       << row.params << ',' << row.macs << '\n';
  }
  return os.str();
}

json to_json(const ConvSwapTable& t) {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["kind"] = "conv_swap_table";
  json arms = json::array();
  for (const CostReport* r :
       {&t.dilated_standard, &t.depthwise_separable, &t.depthwise_dilated_separable}) {
    arms.push_back({{"arm", r->arm},
                    {"profile", r->profile},
                    {"totals", totals_json(r->totals)}});
  }
  j["arms"] = arms;
  j["matched_ratio"] = t.matched_ratio;
  j["same_width_ratio"] = t.same_width_ratio;
  return j;
}

std::string to_text(const ConvSwapTable& t) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof line, "%-30s %-8s %12s %12s\n", "convolution", "widths", "macs (M)",
                "params (M)");
  os << line;
  for (const CostReport* r :
       {&t.dilated_standard, &t.depthwise_separable, &t.depthwise_dilated_separable}) {
    std::snprintf(line, sizeof line, "%-30s %-8s %12.1f %12.3f\n", r->arm.c_str(),
                  r->profile.c_str(), r->totals.macs / 1e6, r->totals.params / 1e6);
    os << line;
  }
  os << "dilated / separable macs: " << fmt("%.2f", t.matched_ratio)
     << " (same widths: " << fmt("%.2f", t.same_width_ratio) << ")\n";
  return os.str();
}

json describe_network(const Network& net, std::size_t input_extent) {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["kind"] = "network";
  j["profile"] = net.profile().name;
  j["input_extent"] = input_extent;
  json layers = json::array();
  for (const auto& rec : net.ledger(input_extent, input_extent)) {
    layers.push_back({{"name", rec.name},
                      {"type", rec.type},
                      {"in_channels", rec.in_channels},
                      {"out_channels", rec.out_channels},
                      {"kernel", rec.kernel},
                      {"stride", rec.stride},
                      {"groups", rec.groups},
                      {"dilations", rec.dilations},
                      {"out_h", rec.out_h},
                      {"out_w", rec.out_w},
                      {"params", rec.params},
                      {"macs", rec.macs}});
  }
  j["layers"] = layers;
  return j;
}

}  // namespace eesp
