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

#include "report.hpp"

#include <fmt/format.h>

namespace goldenrule::cli {

ordered_json to_json(const Matrix& m) {
  ordered_json rows = ordered_json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (double x : m.row(i)) row.push_back(x);
    rows.push_back(std::move(row));
  }
  return rows;
}

ordered_json to_json(const Vector& v) {
  ordered_json a = ordered_json::array();
  for (double x : v) a.push_back(x);
  return a;
}

namespace {

ordered_json estimates(const EstimateVector& v) {
  ordered_json mean = ordered_json::array();
  ordered_json se = ordered_json::array();
  for (const Estimate& e : v) {
    mean.push_back(e.mean);
    se.push_back(e.std_error);
  }
  return {{"mean", mean}, {"std_error", se}};
}

ordered_json estimates(const EstimateMatrix& m) {
  ordered_json mean = ordered_json::array();
  ordered_json se = ordered_json::array();
  for (std::size_t i = 0; i < m.size(); ++i) {
    ordered_json mr = ordered_json::array();
    ordered_json sr = ordered_json::array();
    for (std::size_t j = 0; j < m.size(); ++j) {
      mr.push_back(m(i, j).mean);
      sr.push_back(m(i, j).std_error);
    }
    mean.push_back(std::move(mr));
    se.push_back(std::move(sr));
  }
  return {{"mean", mean}, {"std_error", se}};
}

}  // namespace

ordered_json to_json(const ValidationReport& report) {
  ordered_json violations = ordered_json::array();
  for (const Violation& v : report.violations) {
    ordered_json item{{"code", std::string(to_string(v.code))}};
    if (v.row) item["row"] = *v.row + 1;
    if (v.col) item["col"] = *v.col + 1;
    item["message"] = v.message;
    violations.push_back(std::move(item));
  }
  ordered_json notes = ordered_json::array();
  for (const auto& note : report.notes) notes.push_back(note);
  return {{"ok", report.ok()}, {"violations", violations}, {"notes", notes}};
}

ordered_json to_json(const FlowSolution& flow) {
  return {{"b", to_json(flow.b)},
          {"b_tilde", to_json(flow.b_tilde)},
          {"lambda_total", to_json(flow.lambda_total)},
          {"r0", to_json(flow.r0)}};
}

ordered_json to_json(const EigenPair& eig) {
  return {{"kappa", eig.kappa}, {"v", to_json(eig.v)}, {"iterations", eig.iterations}, {"residual", eig.residual}};
}

ordered_json to_json(const QueueStats& stats) {
  return {{"l_local", to_json(stats.l_local)},
          {"l_foreign", to_json(stats.l_foreign)},
          {"l_cross", to_json(stats.l_cross)},
          {"local_delay", to_json(stats.local_delay)},
          {"foreign_delay", to_json(stats.foreign_delay)},
          {"disutility", to_json(stats.disutility)}};
}

ordered_json to_json(const SimReport& report) {
  ordered_json out{{"l_local", estimates(report.l_local)},
                   {"l_foreign", estimates(report.l_foreign)},
                   {"l_cross", estimates(report.l_cross)},
                   {"local_delay", estimates(report.local_delay)},
                   {"foreign_delay", estimates(report.foreign_delay)},
                   {"system_time", estimates(report.system_time)},
                   {"visit_rate", estimates(report.visit_rate)},
                   {"exogenous_rate", estimates(report.exogenous_rate)},
                   {"local_arrival_rate", estimates(report.local_arrival_rate)},
                   {"foreign_arrival_rate", estimates(report.foreign_arrival_rate)}};
  if (!report.disutility.empty()) out["disutility"] = estimates(report.disutility);
  out["event_count"] = report.event_count;
  out["observed_time"] = report.sim_time;
  ordered_json reps = ordered_json::array();
  for (const auto& r : report.replications) {
    reps.push_back({{"event_count", r.event_count},
                    {"sim_time", r.sim_time},
                    {"observed_time", r.observed_time},
                    {"little_gap_local", estimates(r.little_gap_local)},
                    {"little_gap_foreign", estimates(r.little_gap_foreign)}});
  }
  out["replications"] = std::move(reps);
  return out;
}

ordered_json to_json(const GoldenRuleTable& table) {
  return {{"ratio", to_json(table.ratio)},
          {"occupancy_ratio", to_json(table.occupancy_ratio)},
          {"kappa", table.kappa},
          {"spread", table.spread},
          {"max_relative_deviation", table.max_relative_deviation}};
}

ordered_json to_json(const DistributedResult& result) {
  return {{"converged", result.converged},
          {"rounds_used", result.rounds_used},
          {"message_count", result.message_count},
          {"monotonicity_violations", result.monotonicity_violations},
          {"b", to_json(result.b)},
          {"v", to_json(result.v)}};
}

ordered_json error_json(const Error& e) {
  ordered_json out{{"code", std::string(to_string(e.code()))}};
  if (!e.stage().empty()) out["stage"] = e.stage();
  out["message"] = e.detail();
  return out;
}

namespace {

std::string scalar(const ordered_json& v) {
  if (v.is_number_float()) return fmt::format("{:.17g}", v.get<double>());
  if (v.is_string()) {
    std::string s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char c : s) {
      if (c == '"') quoted += '"';
      quoted += c == '\n' ? ' ' : c;
    }
    return quoted + "\"";
  }
  if (v.is_null()) return "";
  return v.dump();
}

bool numeric_array(const ordered_json& v) {
  if (!v.is_array() || v.empty()) return false;
  for (const auto& x : v)
    if (!x.is_number()) return false;
  return true;
}

bool numeric_matrix(const ordered_json& v) {
  if (!v.is_array() || v.empty()) return false;
  for (const auto& row : v)
    if (!numeric_array(row)) return false;
  return true;
}

void flatten(const std::string& section, const std::string& field, const ordered_json& v, std::string& out) {
  const auto line = [&](const std::string& i, const std::string& j, const std::string& value) {
    out += fmt::format("{},{},{},{},{}\n", section, field, i, j, value);
  };
  if (v.is_object()) {
    for (const auto& [key, child] : v.items()) {
      flatten(section, field.empty() ? key : field + "." + key, child, out);
    }
  } else if (numeric_matrix(v)) {
    for (std::size_t i = 0; i < v.size(); ++i)
      for (std::size_t j = 0; j < v[i].size(); ++j) line(std::to_string(i + 1), std::to_string(j + 1), scalar(v[i][j]));
  } else if (numeric_array(v)) {
    for (std::size_t i = 0; i < v.size(); ++i) line(std::to_string(i + 1), "", scalar(v[i]));
  } else if (v.is_array()) {
    for (std::size_t k = 0; k < v.size(); ++k) flatten(section, fmt::format("{}[{}]", field, k + 1), v[k], out);
  } else {
    line("", "", scalar(v));
  }
}

}  // namespace

std::string to_csv(const ordered_json& report) {
  std::string out = "section,field,i,j,value\n";
  for (const auto& [section, body] : report.items()) flatten(section, "", body, out);
  return out;
}

}  // namespace goldenrule::cli
