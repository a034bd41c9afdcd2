// Copyright 2026 The goldenrule Authors
// SPDX-License-Identifier: Apache-2.0
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

#include "cli.hpp"

#include <fmt/chrono.h>
#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>

#include "CLI11.hpp"
#include "goldenrule/allocation.hpp"
#include "goldenrule/distributed.hpp"
#include "goldenrule/jackson_sim.hpp"
#include "report.hpp"
#include "spec_io.hpp"

namespace goldenrule::cli {

namespace {

struct Options {
  std::string input;
  std::string output;
  std::string format = "json";

  std::string feasibility = "fail";
  double margin = 0.05;

  std::uint64_t horizon = 1'000'000;
  std::uint64_t seed = 1;
  std::size_t replications = 1;
  double warmup = 0.2;

  double tol = 1e-9;
  std::size_t max_rounds = 10'000;
  bool trace = false;
};

const std::map<std::string, FeasibilityMode> kModes{
    {"fail", FeasibilityMode::kFail},
    {"augment", FeasibilityMode::kAugmentCapacity},
    {"thin", FeasibilityMode::kThinDemand},
};

std::string timestamp() {
  const auto now = std::chrono::time_point_cast<std::chrono::seconds>(std::chrono::system_clock::now());
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::to_time_t(now)));
}

ordered_json manifest(const std::string& command, const Options& o) {
  ordered_json options = ordered_json::object();
  if (command == "allocate") {
    options["feasibility"] = o.feasibility;
    options["margin"] = o.margin;
  } else if (command == "simulate") {
    options["horizon"] = o.horizon;
    options["seed"] = o.seed;
    options["replications"] = o.replications;
    options["warmup"] = o.warmup;
  } else if (command == "distributed") {
    options["tol"] = o.tol;
    options["max_rounds"] = o.max_rounds;
    options["trace"] = o.trace;
  }
  return {{"subcommand", command},
          {"input", o.input},
          {"format", o.format},
          {"options", options},
          {"version", GOLDENRULE_VERSION},
          {"timestamp", timestamp()}};
}

/// Validation gate shared by the analytic subcommands.
bool validated(const NetworkSpec& spec, ordered_json& report) {
  const ValidationReport v = validate_spec(spec);
  report["validation"] = to_json(v);
  if (v.ok()) return true;
  std::string codes;
  for (const auto& violation : v.violations) {
    if (!codes.empty()) codes += ", ";
    codes += to_string(violation.code);
  }
  report["error"] = error_json(Error(ErrorCode::kInvalidSpec, codes, "validate"));
  return false;
}

int cmd_validate(const SpecFile& file, ordered_json& report) {
  return validated(file.spec, report) ? kExitOk : kExitDomain;
}

int cmd_solve(const SpecFile& file, ordered_json& report) {
  if (!validated(file.spec, report)) return kExitDomain;
  const FlowSolution flow = solve_flow_balance(file.spec);
  report["flow"] = to_json(flow);
  report["eigen"] = to_json(perron_eigenpair(flow.b_tilde));
  return kExitOk;
}

int cmd_allocate(const SpecFile& file, const Options& o, ordered_json& report) {
  if (!validated(file.spec, report)) return kExitDomain;
  PipelineOptions options;
  options.feasibility = kModes.at(o.feasibility);
  options.margin = o.margin;
  const PipelineResult r = golden_rule_pipeline(file.spec, options);
  report["flow"] = to_json(r.flow);
  report["eigen"] = to_json(r.eigen);
  report["allocation"] = {{"alpha", to_json(r.allocation.alpha)},
                          {"mu0", to_json(r.allocation.mu0)},
                          {"mu_foreign", to_json(r.allocation.mu_foreign)},
                          {"kappa", r.allocation.kappa},
                          {"threshold", to_json(feasibility_threshold(r.flow, r.eigen))},
                          {"lambda0", to_json(r.spec.lambda0)},
                          {"mu", to_json(r.spec.mu)}};
  report["queue_stats"] = to_json(r.stats);
  return kExitOk;
}

int cmd_simulate(const SpecFile& file, const Options& o, ordered_json& report) {
  if (!validated(file.spec, report)) return kExitDomain;
  SimConfig config;
  config.spec = file.spec;
  config.horizon = o.horizon;
  config.seed = o.seed;
  config.replications = o.replications;
  config.warmup = o.warmup;
  std::optional<PipelineResult> golden;
  if (file.mu0) {
    config.mu0 = *file.mu0;
  } else {
    golden = golden_rule_pipeline(file.spec);
    config.mu0 = golden->allocation.mu0;
    config.alpha = golden->allocation.alpha;
  }
  const SimReport sim = simulate(config);
  ordered_json section = to_json(sim);
  section["mu0"] = to_json(config.mu0);
  if (golden) section["golden_rule"] = to_json(verify_golden_rule(sim, golden->flow, golden->allocation));
  report["simulation"] = std::move(section);
  return kExitOk;
}

int cmd_distributed(const SpecFile& file, const Options& o, ordered_json& report, std::ostream& err) {
  if (!validated(file.spec, report)) return kExitDomain;
  DistributedOptions options;
  options.tol = o.tol;
  options.max_rounds = o.max_rounds;
  const auto emit_trace = [&](const DistributedResult& r) {
    if (!o.trace) return;
    for (const RoundTrace& t : r.trace) {
      err << ordered_json{{"round", t.round},
                          {"max_delta_v", t.max_delta_v},
                          {"max_delta_b", t.max_delta_b},
                          {"messages", t.messages}}
                 .dump()
          << '\n';
    }
  };
  try {
    const DistributedResult r = run_until_converged(file.spec, options);
    emit_trace(r);
    report["distributed"] = to_json(r);
    return kExitOk;
  } catch (const DistributedNoConvergence& e) {
    emit_trace(e.last());
    report["distributed"] = to_json(e.last());
    report["error"] = error_json(e);
    return kExitDomain;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Golden-rule capacity allocation for P2P query networks", "goldenrule"};
  Options o;
  app.add_option("--input", o.input, "Network spec (JSON)")->required();
  app.add_option("--output", o.output, "Report path (default: standard output)");
  app.add_option("--format", o.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
  app.require_subcommand(1);

  app.add_subcommand("validate", "Check a network spec")->fallthrough();
  app.add_subcommand("solve", "Flow balance and Perron eigenpair")->fallthrough();
  auto* allocate = app.add_subcommand("allocate", "Golden-rule altruism and Nash split")->fallthrough();
  allocate->add_option("--feasibility", o.feasibility, "fail | augment | thin")
      ->check(CLI::IsMember({"fail", "augment", "thin"}));
  allocate->add_option("--margin", o.margin, "Feasibility margin in [0, 1)");
  auto* sim = app.add_subcommand("simulate", "Discrete-event simulation")->fallthrough();
  sim->add_option("--horizon", o.horizon, "Exogenous arrivals per replication");
  sim->add_option("--seed", o.seed, "RNG seed");
  sim->add_option("--replications", o.replications, "Independent replications");
  sim->add_option("--warmup", o.warmup, "Discarded leading fraction");
  auto* dist = app.add_subcommand("distributed", "Round-based distributed solver")->fallthrough();
  dist->add_option("--tol", o.tol, "Convergence tolerance");
  dist->add_option("--max-rounds", o.max_rounds, "Round limit");
  dist->add_flag("--trace", o.trace, "Per-round JSON lines on stderr");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  SpecFile file;
  try {
    file = read_spec(o.input);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  ordered_json report;
  report["manifest"] = manifest(command, o);
  int code = kExitOk;
  try {
    if (command == "validate") code = cmd_validate(file, report);
    else if (command == "solve") code = cmd_solve(file, report);
    else if (command == "allocate") code = cmd_allocate(file, o, report);
    else if (command == "simulate") code = cmd_simulate(file, o, report);
    else code = cmd_distributed(file, o, report, err);
  } catch (const Error& e) {
    report["error"] = error_json(e);
    code = kExitDomain;
  }
  if (report.contains("error")) {
    err << "error: " << report["error"]["code"].get<std::string>() << ": "
        << report["error"]["message"].get<std::string>() << '\n';
  }

  const std::string text = o.format == "csv" ? to_csv(report) : report.dump(2) + "\n";
  if (o.output.empty()) {
    out << text;
  } else {
    std::ofstream file_out(o.output);
    if (!file_out) {
      err << "error: cannot write " << o.output << '\n';
      return kExitUsage;
    }
    file_out << text;
  }
  return code;
}

}  // namespace goldenrule::cli
