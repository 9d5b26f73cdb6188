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

// eespnet: profile, verify and exercise the EESP network family.
//
//   eespnet summary
//   eespnet profile c284 --format json
//   eespnet verify --suite conv-oracle
//   eespnet schedule --eta-min 0.1 --eta-max 0.5 -T 5 --epochs 10
//   eespnet probe-gridding --rates 1,2,3,4
//   eespnet train-toy --schedule both
//   eespnet compare-convs
//
// Exit codes: 0 all requested checks passed, 1 a check failed, 2 usage error.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "eesp/analysis.hpp"
#include "eesp/errors.hpp"
#include "eesp/report.hpp"
#include "eesp/schedule.hpp"
#include "eesp/train.hpp"
#include "eesp/verify.hpp"

namespace {

using nlohmann::json;
using namespace eesp;

constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kUsage = 2;

struct Common {
  std::string format = "text";
  std::uint64_t seed = 1;
  std::string output;
};

struct Emitted {
  std::string body;
  int code = kOk;
};

int emit(const Common& c, const Emitted& e) {
  if (c.output.empty()) {
    std::cout << e.body;
    if (!e.body.empty() && e.body.back() != '\n') std::cout << '\n';
  } else {
    std::ofstream f(c.output);
    if (!f) {
      std::cerr << "error: cannot write " << c.output << "\n";
      return kUsage;
    }
    f << e.body;
    if (!e.body.empty() && e.body.back() != '\n') f << '\n';
  }
  return e.code;
}

std::string with_version(json j) {
  if (!j.contains("schema_version")) j["schema_version"] = kReportSchemaVersion;
  return j.dump(2);
}

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

// ----------------------------------------------------------------- summary

struct SummaryRow {
  std::string layer;
  std::string output;
  std::string kernel;
  std::string repeat;
  std::vector<std::size_t> channels;  // one per profile
};

Emitted run_summary(const Common& c) {
  const auto& profiles = canonical_profiles();
  std::vector<SummaryRow> rows{
      {"Convolution", "", "3x3 / 2", "1", {}},
      {"Strided EESP", "", "", "1", {}},
      {"Strided EESP", "", "", "1", {}},
      {"EESP", "", "", "", {}},
      {"Strided EESP", "", "", "1", {}},
      {"EESP", "", "", "", {}},
      {"Strided EESP", "", "", "1", {}},
      {"EESP", "", "", "", {}},
      {"Depth-wise convolution", "", "3x3", "", {}},
      {"Group convolution", "", "1x1", "", {}},
      {"Global avg. pool", "1x1", "", "", {}},
      {"Fully connected", "", "", "", {}},
  };
  std::vector<CostReport> reports;
  for (const auto& p : profiles) {
    const Network net = build_network(p, Rng(c.seed));
    const auto ledger = net.ledger(224, 224);
    const auto units = net.units();
    auto side = [](std::size_t s) { return std::to_string(s) + "x" + std::to_string(s); };
    rows[0].output = side(ledger.front().out_h);
    rows[0].channels.push_back(ledger.front().out_channels);
    std::size_t row = 1;
    for (std::size_t level = 0; level < 4; ++level) {
      const std::size_t extent = 224 >> (level + 2);
      std::size_t repeats = 0;
      for (const auto& u : units) {
        if (u.level == level && !u.strided) ++repeats;
      }
      for (const auto& u : units) {
        if (u.level == level && u.strided) {
          rows[row].output = side(extent);
          rows[row].channels.push_back(u.out_channels);
        }
      }
      ++row;
      if (repeats > 0) {
        rows[row].output = side(extent);
        rows[row].repeat = std::to_string(repeats);
        rows[row].channels.push_back(p.stage_channels[level]);
        ++row;
      }
    }
    const auto& dw = ledger[ledger.size() - 3];
    const auto& gc = ledger[ledger.size() - 2];
    rows[8].output = side(dw.out_h);
    rows[8].channels.push_back(dw.out_channels);
    rows[9].output = side(gc.out_h);
    rows[9].channels.push_back(gc.out_channels);
    rows[10].kernel = side(gc.out_h);
    rows[10].channels.push_back(gc.out_channels);
    rows[11].channels.push_back(ledger.back().out_channels);
    reports.push_back(profile(net, 224));
  }

  Emitted e;
  if (c.format == "json") {
    json j;
    j["kind"] = "summary";
    j["profiles"] = json::array();
    for (const auto& p : profiles) j["profiles"].push_back(p.name);
    j["rows"] = json::array();
    for (const auto& r : rows) {
      j["rows"].push_back({{"layer", r.layer},
                           {"output", r.output},
                           {"kernel", r.kernel},
                           {"repeat", r.repeat},
                           {"channels", r.channels}});
    }
    for (std::size_t i = 0; i < reports.size(); ++i) {
      j["totals"][profiles[i].name] = {{"macs", reports[i].totals.macs},
                                       {"params", reports[i].totals.params},
                                       {"macs_delta_pct", reports[i].reference->macs_pct},
                                       {"params_delta_pct", reports[i].reference->params_pct}};
    }
    e.body = with_version(j);
  } else if (c.format == "csv") {
    std::ostringstream os;
    os << "layer,output,kernel,repeat";
    for (const auto& p : profiles) os << ',' << p.name;
    os << '\n';
    for (const auto& r : rows) {
      os << r.layer << ',' << r.output << ',' << r.kernel << ',' << r.repeat;
      for (auto ch : r.channels) os << ',' << ch;
      os << '\n';
    }
    os << "Complexity (M),,,";
    for (const auto& r : reports) os << ',' << fixed(r.totals.macs / 1e6, 1);
    os << "\nParameters (M),,,";
    for (const auto& r : reports) os << ',' << fixed(r.totals.params / 1e6, 3);
    os << '\n';
    e.body = os.str();
  } else {
    std::ostringstream os;
    char line[256];
    std::snprintf(line, sizeof line, "%-24s %-8s %-8s %-6s", "layer", "output", "kernel", "repeat");
    os << line;
    for (const auto& p : profiles) {
      std::snprintf(line, sizeof line, " %8s", p.name.c_str());
      os << line;
    }
    os << '\n';
    for (const auto& r : rows) {
      std::snprintf(line, sizeof line, "%-24s %-8s %-8s %-6s", r.layer.c_str(), r.output.c_str(),
                    r.kernel.c_str(), r.repeat.c_str());
      os << line;
      for (auto ch : r.channels) {
        std::snprintf(line, sizeof line, " %8zu", ch);
        os << line;
      }
      os << '\n';
    }
    auto total_row = [&](const char* name, auto value) {
      std::snprintf(line, sizeof line, "%-24s %-8s %-8s %-6s", name, "", "", "");
      os << line;
      for (const auto& r : reports) {
        std::snprintf(line, sizeof line, " %8s", value(r).c_str());
        os << line;
      }
      os << '\n';
    };
    total_row("Complexity (M)", [](const CostReport& r) { return fixed(r.totals.macs / 1e6, 1); });
    total_row("  reference", [](const CostReport& r) {
      return fixed(reference_cost(r.profile).macs_millions, 0);
    });
    total_row("Parameters (M)", [](const CostReport& r) { return fixed(r.totals.params / 1e6, 3); });
    total_row("  reference", [](const CostReport& r) {
      return fixed(reference_cost(r.profile).params_millions, 2);
    });
    e.body = os.str();
  }
  return e;
}

// ----------------------------------------------------------------- profile

Emitted run_profile(const Common& c, const std::string& name, std::size_t extent,
                    const CostConventions& conv) {
  const Network net = build_network(profile_by_name(name), Rng(c.seed));
  const CostReport r = profile(net, extent, conv);
  Emitted e;
  if (c.format == "json") {
    e.body = to_json(r).dump(2);
  } else if (c.format == "csv") {
    e.body = to_csv(r);
  } else {
    e.body = to_text(r);
  }
  if (r.reference) {
    std::string failed;
    if (std::abs(r.reference->params_pct) > 5.0) failed += " params_within_5pct";
    if (std::abs(r.reference->macs_pct) > 10.0) failed += " macs_within_10pct";
    if (!failed.empty()) {
      std::cerr << "check failed:" << failed << "\n";
      e.code = kCheckFailed;
    }
  }
  return e;
}

// ------------------------------------------------------------------ verify

Emitted run_verify(const Common& c, const std::string& suite) {
  const auto results = verify::run(suite, c.seed);
  Emitted e;
  bool ok = true;
  for (const auto& s : results) ok = ok && s.passed();
  if (c.format == "json") {
    json j;
    j["kind"] = "verify";
    j["passed"] = ok;
    j["suites"] = json::array();
    for (const auto& s : results) {
      json checks = json::array();
      for (const auto& ch : s.checks) {
        checks.push_back({{"name", ch.name}, {"passed", ch.passed}, {"detail", ch.detail}});
      }
      j["suites"].push_back(
          {{"suite", s.suite}, {"passed", s.passed()}, {"seconds", s.seconds}, {"checks", checks}});
    }
    e.body = with_version(j);
  } else if (c.format == "csv") {
    std::ostringstream os;
    os << "suite,check,passed,detail\n";
    for (const auto& s : results) {
      for (const auto& ch : s.checks) {
        os << s.suite << ",\"" << ch.name << "\"," << (ch.passed ? "true" : "false") << ",\""
           << ch.detail << "\"\n";
      }
    }
    e.body = os.str();
  } else {
    std::ostringstream os;
    for (const auto& s : results) {
      os << s.suite << " (" << fixed(s.seconds, 2) << " s)\n";
      for (const auto& ch : s.checks) {
        os << "  [" << (ch.passed ? "PASS" : "FAIL") << "] " << ch.name;
        if (!ch.detail.empty()) os << "  (" << ch.detail << ")";
        os << '\n';
      }
    }
    os << (ok ? "all checks passed\n" : "FAILED\n");
    e.body = os.str();
  }
  if (!ok) {
    for (const auto& s : results) {
      for (const auto& ch : s.checks) {
        if (!ch.passed) std::cerr << "check failed: " << s.suite << ": " << ch.name << "\n";
      }
    }
    e.code = kCheckFailed;
  }
  return e;
}

// ---------------------------------------------------------------- schedule

Emitted run_schedule(const Common& c, const LrSchedule& s, std::size_t epochs) {
  const auto lrs = lr_sequence(s, epochs);
  Emitted e;
  if (c.format == "json") {
    json j;
    j["kind"] = "schedule";
    j["eta_min"] = s.eta_min;
    j["eta_max"] = s.eta_max;
    j["T"] = s.T;
    j["milestones"] = s.milestones;
    j["mode"] = to_string(s.mode);
    j["lr"] = lrs;
    e.body = with_version(j);
  } else {
    std::ostringstream os;
    os.precision(12);
    const char sep = c.format == "csv" ? ',' : ' ';
    os << "epoch" << sep << "lr\n";
    for (std::size_t t = 0; t < lrs.size(); ++t) os << t << sep << lrs[t] << '\n';
    e.body = os.str();
  }
  return e;
}

// ---------------------------------------------------------- probe-gridding

Emitted run_probe(const Common& c, const std::vector<std::size_t>& rates) {
  const GriddingResult plain = gridding_probe(rates, false);
  const GriddingResult fused = gridding_probe(rates, true);
  const GriddingResult plain_ref = tap_union(rates, false);
  const GriddingResult fused_ref = tap_union(rates, true);
  const bool agree = plain.nonzero == plain_ref.nonzero && fused.nonzero == fused_ref.nonzero;
  const bool improves = fused.coverage >= plain.coverage;
  Emitted e;
  if (c.format == "json") {
    json j;
    j["kind"] = "gridding_probe";
    j["rates"] = rates;
    j["field"] = fused.field;
    j["without_hff"] = {{"nonzero", plain.nonzero}, {"coverage", plain.coverage}};
    j["with_hff"] = {{"nonzero", fused.nonzero}, {"coverage", fused.coverage}};
    j["tap_union_agrees"] = agree;
    e.body = with_version(j);
  } else if (c.format == "csv") {
    std::ostringstream os;
    os << "mode,field,nonzero,coverage\n"
       << "without_hff," << plain.field << ',' << plain.nonzero << ',' << plain.coverage << '\n'
       << "with_hff," << fused.field << ',' << fused.nonzero << ',' << fused.coverage << '\n';
    e.body = os.str();
  } else {
    std::ostringstream os;
    os << "field " << fused.field << "x" << fused.field << "\n"
       << "max-rate branch alone: " << plain.nonzero << " cells, coverage "
       << fixed(plain.coverage, 4) << "\n"
       << "with HFF:              " << fused.nonzero << " cells, coverage "
       << fixed(fused.coverage, 4) << "\n"
       << "tap-union oracle " << (agree ? "agrees" : "DISAGREES") << "\n";
    e.body = os.str();
  }
  if (!agree || !improves) {
    std::cerr << "check failed:" << (agree ? "" : " tap_union_agreement")
              << (improves ? "" : " hff_coverage_not_lower") << "\n";
    e.code = kCheckFailed;
  }
  return e;
}

// --------------------------------------------------------------- train-toy

struct ToyOptions {
  std::size_t samples = 128;
  std::size_t epochs = 8;
  std::size_t batch = 16;
  std::string schedule = "cyclic";
  double eta_min = 0.02;
  double eta_max = 0.1;
  std::size_t T = 5;
  std::vector<std::size_t> milestones;
  std::string loss = "ce";
  double min_accuracy = 0.0;
};

Emitted run_train(const Common& c, const ToyOptions& o) {
  const Dataset data = make_bars_and_blobs(o.samples, c.seed);
  TrainConfig cfg;
  cfg.epochs = o.epochs;
  cfg.batch_size = o.batch;
  cfg.seed = c.seed;
  cfg.loss = o.loss == "bce" ? LossKind::binary_cross_entropy : LossKind::cross_entropy;

  std::vector<std::string> modes;
  if (o.schedule == "both") {
    modes = {"cyclic", "fixed"};
  } else {
    modes = {o.schedule};
  }
  std::vector<std::pair<std::string, History>> runs;
  for (const auto& m : modes) {
    const LrSchedule s{o.eta_min, o.eta_max, o.T, o.milestones, schedule_mode_from_string(m)};
    TinyEespNet net({}, Rng(c.seed));
    runs.emplace_back(m, train_toy(net, data, cfg, s));
  }

  Emitted e;
  if (c.format == "json") {
    json j;
    j["kind"] = "train_history";
    j["runs"] = json::array();
    for (const auto& [m, h] : runs) {
      json hist = json::array();
      for (const auto& r : h) {
        hist.push_back({{"epoch", r.epoch}, {"lr", r.lr}, {"loss", r.loss}, {"acc", r.accuracy}});
      }
      j["runs"].push_back({{"schedule", m}, {"history", hist}});
    }
    e.body = with_version(j);
  } else {
    std::ostringstream os;
    for (const auto& [m, h] : runs) {
      if (runs.size() > 1) os << "# schedule " << m << '\n';
      os << history_csv(h);
    }
    e.body = os.str();
  }
  for (const auto& [m, h] : runs) {
    if (h.back().accuracy < o.min_accuracy) {
      std::cerr << "check failed: " << m << " final accuracy " << h.back().accuracy << " < "
                << o.min_accuracy << "\n";
      e.code = kCheckFailed;
    }
  }
  return e;
}

// ----------------------------------------------------------- compare-convs

Emitted run_compare(const Common& c, const std::string& sep, const std::string& dil) {
  const ConvSwapTable t = conv_swap_table(profile_by_name(sep), profile_by_name(dil));
  Emitted e;
  if (c.format == "json") {
    e.body = to_json(t).dump(2);
  } else if (c.format == "csv") {
    std::ostringstream os;
    os << "arm,profile,params,macs\n";
    for (const CostReport* r :
         {&t.dilated_standard, &t.depthwise_separable, &t.depthwise_dilated_separable}) {
      os << r->arm << ',' << r->profile << ',' << r->totals.params << ',' << r->totals.macs << '\n';
    }
    e.body = os.str();
  } else {
    e.body = to_text(t);
  }
  if (!(t.depthwise_separable.totals == t.depthwise_dilated_separable.totals)) {
    std::cerr << "check failed: separable_arms_identical\n";
    e.code = kCheckFailed;
  }
  return e;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EESP network family: cost ledgers, oracles, schedules and toy training"};
  app.require_subcommand(1);
  Common common;
  const std::vector<std::string> formats{"text", "json", "csv"};
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--format", common.format, "text | json | csv")
        ->check(CLI::IsMember(formats))
        ->capture_default_str();
    sub->add_option("--seed", common.seed, "RNG seed")->capture_default_str();
    sub->add_option("-o,--output", common.output, "write the report here instead of stdout");
  };
  std::vector<std::string> profile_names;
  for (const auto& p : canonical_profiles()) profile_names.push_back(p.name);

  auto* summary = app.add_subcommand("summary", "Layer table for all six width profiles. CSV columns: "
                                    "layer,output,kernel,repeat,c28..c284");
  add_common(summary);

  std::string profile_name;
  std::size_t extent = 224;
  CostConventions conventions;
  auto* prof = app.add_subcommand(
      "profile", "Per-layer params / MACs with reference deltas. CSV columns: "
                 "layer,kind,out_h,out_w,params,macs");
  prof->add_option("profile", profile_name, "c28 | c86 | c123 | c169 | c224 | c284")
      ->required()
      ->check(CLI::IsMember(profile_names));
  prof->add_option("--extent", extent, "square input extent (multiple of 32)")
      ->check([](const std::string& v) {
        return std::stoul(v) % 32 == 0 && std::stoul(v) > 0 ? std::string()
                                                            : std::string("must be k * 32");
      })
      ->capture_default_str();
  prof->add_flag("--count-classifier", conventions.count_classifier,
                 "include classifier multiply-adds in the MAC total");
  prof->add_flag("--count-bias", conventions.count_bias, "include bias terms in the parameters");
  add_common(prof);

  std::string suite = "all";
  std::vector<std::string> suites = verify::suite_names();
  suites.push_back("all");
  auto* ver = app.add_subcommand("verify", "Run oracle / gradient / invariant suites. CSV columns: "
                                          "suite,check,passed,detail");
  ver->add_option("--suite", suite)->check(CLI::IsMember(suites))->capture_default_str();
  add_common(ver);

  LrSchedule sched;
  std::size_t sched_epochs = 10;
  std::string sched_mode = "cyclic";
  auto* sch = app.add_subcommand("schedule", "Dump (epoch, lr) pairs. CSV columns: epoch,lr");
  sch->add_option("--eta-min", sched.eta_min)->capture_default_str();
  sch->add_option("--eta-max", sched.eta_max)->capture_default_str();
  sch->add_option("-T,--cycle", sched.T, "cycle length")->capture_default_str();
  sch->add_option("--epochs", sched_epochs)->capture_default_str();
  sch->add_option("--milestones", sched.milestones, "epochs where the rate halves")
      ->delimiter(',');
  sch->add_option("--mode", sched_mode)
      ->check(CLI::IsMember({"cyclic", "fixed"}))
      ->capture_default_str();
  add_common(sch);

  std::vector<std::size_t> rates{1, 2, 3, 4};
  auto* probe = app.add_subcommand(
      "probe-gridding", "Impulse coverage with and without hierarchical fusion. CSV columns: "
      "mode,field,nonzero,coverage");
  probe->add_option("--rates", rates)->delimiter(',')->capture_default_str();
  add_common(probe);

  ToyOptions toy;
  auto* train = app.add_subcommand("train-toy",
                                   "Train the tiny EESP net on bars vs blobs. CSV columns: "
                                   "epoch,lr,loss,acc");
  train->add_option("--samples", toy.samples)->capture_default_str();
  train->add_option("--epochs", toy.epochs)->capture_default_str();
  train->add_option("--batch", toy.batch)->capture_default_str();
  train->add_option("--schedule", toy.schedule)
      ->check(CLI::IsMember({"cyclic", "fixed", "both"}))
      ->capture_default_str();
  train->add_option("--eta-min", toy.eta_min)->capture_default_str();
  train->add_option("--eta-max", toy.eta_max)->capture_default_str();
  train->add_option("-T,--cycle", toy.T)->capture_default_str();
  train->add_option("--milestones", toy.milestones)->delimiter(',');
  train->add_option("--loss", toy.loss)->check(CLI::IsMember({"ce", "bce"}))->capture_default_str();
  train->add_option("--min-accuracy", toy.min_accuracy, "fail below this final accuracy");
  add_common(train);

  std::string sep_profile = "c123", dil_profile = "c86";
  auto* cmp = app.add_subcommand("compare-convs",
                                 "Three-arm convolution comparison. CSV columns: "
                                 "arm,profile,params,macs");
  cmp->add_option("--profile", sep_profile, "widths for the separable arms")
      ->check(CLI::IsMember(profile_names))
      ->capture_default_str();
  cmp->add_option("--dilated-profile", dil_profile, "widths for the standard dilated arm")
      ->check(CLI::IsMember(profile_names))
      ->capture_default_str();
  add_common(cmp);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*summary) return emit(common, run_summary(common));
    if (*prof) return emit(common, run_profile(common, profile_name, extent, conventions));
    if (*ver) return emit(common, run_verify(common, suite));
    if (*sch) {
      sched.mode = schedule_mode_from_string(sched_mode);
      return emit(common, run_schedule(common, sched, sched_epochs));
    }
    if (*probe) return emit(common, run_probe(common, rates));
    if (*train) return emit(common, run_train(common, toy));
    if (*cmp) return emit(common, run_compare(common, sep_profile, dil_profile));
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const TrainingError& e) {
    std::cerr << "check failed: training diverged at epoch " << e.epoch() << ": " << e.what()
              << "\n";
    return kCheckFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kCheckFailed;
  }
  return kUsage;
}
