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

#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "json.hpp"
#include "spec_io.hpp"

using goldenrule::cli::run;
using nlohmann::json;

namespace {

const std::string kFixtures = GOLDENRULE_FIXTURE_DIR;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string fixture(const std::string& name) { return kFixtures + "/" + name; }

json without_timestamp(const std::string& text) {
  json j = json::parse(text);
  j["manifest"].erase("timestamp");
  return j;
}

}  // namespace

TEST_CASE("validate exit codes") {
  CHECK(invoke({"validate", "--input", fixture("three_peer.json")}).code == 0);

  const auto bad = invoke({"validate", "--input", fixture("row_sum_exceeds.json")});
  CHECK(bad.code == 1);
  const json report = json::parse(bad.out);
  CHECK(report["validation"]["ok"] == false);
  CHECK(report["validation"]["violations"][0]["code"] == "ROW_SUM_EXCEEDS_ONE");
  CHECK(report["validation"]["violations"][0]["row"] == 1);

  CHECK(invoke({"validate", "--input", fixture("malformed.json")}).code == 2);
  CHECK(invoke({"validate", "--input", fixture("missing.json")}).code == 2);
  CHECK(invoke({"--input", fixture("three_peer.json")}).code == 2);
  CHECK(invoke({"validate"}).code == 2);
  CHECK(invoke({"validate", "--input", fixture("three_peer.json"), "--format", "xml"}).code == 2);
}

TEST_CASE("solve reports the eigenpair") {
  const auto r = invoke({"solve", "--input", fixture("three_peer.json")});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(std::abs(j["eigen"]["kappa"].get<double>() - 2.366) < 1e-3);
  CHECK(j["flow"]["lambda_total"][0].get<double>() == doctest::Approx(5.9375));
  CHECK(j["manifest"]["subcommand"] == "solve");

  const auto sym = json::parse(invoke({"solve", "--input", fixture("symmetric2.json")}).out);
  CHECK(sym["eigen"]["kappa"].get<double>() == doctest::Approx(2.0 / 3).epsilon(1e-12));

  const auto reducible = invoke({"solve", "--input", fixture("reducible.json")});
  CHECK(reducible.code == 1);
  CHECK(reducible.out.find("NOT_IRREDUCIBLE") != std::string::npos);
}

TEST_CASE("allocate") {
  const auto r = invoke({"allocate", "--input", fixture("three_peer.json")});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  const auto& a = j["allocation"];
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(a["mu0"][i].get<double>() + a["mu_foreign"][i].get<double>() == j["allocation"]["mu"][i].get<double>());
  }
  CHECK(a["alpha"][0].get<double>() == doctest::Approx(58.671450832703403).epsilon(1e-8));

  const auto infeasible = invoke({"allocate", "--input", fixture("infeasible.json"), "--feasibility=fail"});
  CHECK(infeasible.code == 1);
  const json e = json::parse(infeasible.out);
  CHECK(e["error"]["code"] == "INFEASIBLE");
  CHECK(e["error"]["stage"] == "feasibility");
  CHECK(e["error"]["message"].get<std::string>().find("peer 1 short by") != std::string::npos);

  const auto thin = invoke({"allocate", "--input", fixture("infeasible.json"), "--feasibility", "thin",
                            "--margin", "0.01"});
  CHECK(thin.code == 0);
  CHECK(json::parse(thin.out)["allocation"]["lambda0"][0].get<double>() < 1.0);

  CHECK(invoke({"allocate", "--input", fixture("three_peer.json"), "--feasibility", "maybe"}).code == 2);
  CHECK(invoke({"allocate", "--input", fixture("three_peer.json"), "--margin", "1.5"}).code == 1);
}

TEST_CASE("simulate is deterministic for a fixed seed") {
  const std::vector<std::string> args{"simulate", "--input", fixture("three_peer.json"), "--horizon", "20000",
                                      "--seed", "3", "--replications", "2"};
  const auto a = invoke(args);
  const auto b = invoke(args);
  REQUIRE(a.code == 0);
  CHECK(without_timestamp(a.out) == without_timestamp(b.out));
  const json j = json::parse(a.out);
  CHECK(j["manifest"]["options"]["seed"] == 3);
  CHECK(j["simulation"]["replications"].size() == 2);
  CHECK(j["simulation"].contains("golden_rule"));
}

TEST_CASE("simulate rejects an unstable split") {
  std::ifstream in(fixture("three_peer.json"));
  std::stringstream buf;
  buf << in.rdbuf();
  json spec = json::parse(buf.str());
  for (auto& p : spec["peers"]) p["mu0"] = 0.5;
  const std::string path = "unstable_split.json";
  std::ofstream(path) << spec.dump();
  const auto r = invoke({"simulate", "--input", path, "--horizon", "1000"});
  CHECK(r.code == 1);
  CHECK(json::parse(r.out)["error"]["code"] == "UNSTABLE_CONFIG");
  std::remove(path.c_str());
}

TEST_CASE("distributed") {
  const auto r = invoke({"distributed", "--input", fixture("three_peer.json"), "--trace"});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  const std::size_t rounds = j["distributed"]["rounds_used"];
  std::size_t lines = 0;
  std::istringstream err(r.err);
  for (std::string line; std::getline(err, line);) {
    CHECK(json::parse(line).contains("max_delta_v"));
    ++lines;
  }
  CHECK(lines == rounds);

  const auto zero = invoke({"distributed", "--input", fixture("three_peer.json"), "--max-rounds", "0"});
  CHECK(zero.code == 1);
  CHECK(json::parse(zero.out)["error"]["code"] == "NO_CONVERGENCE");
}

TEST_CASE("csv output") {
  const auto r = invoke({"solve", "--input", fixture("symmetric2.json"), "--format", "csv"});
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  CHECK(line == "section,field,i,j,value");
  bool saw_b12 = false;
  bool saw_kappa = false;
  while (std::getline(in, line)) {
    if (line.rfind("flow,b,1,2,", 0) == 0) {
      saw_b12 = true;
      CHECK(std::stod(line.substr(11)) == doctest::Approx(2.0 / 3).epsilon(1e-15));
    }
    if (line.rfind("eigen,kappa,,,", 0) == 0) saw_kappa = true;
  }
  CHECK(saw_b12);
  CHECK(saw_kappa);
}

TEST_CASE("json reports round-trip losslessly") {
  const auto r = invoke({"allocate", "--input", fixture("three_peer.json")});
  const json j = json::parse(r.out);
  const json again = json::parse(j.dump());
  CHECK(j == again);
  const double alpha = j["allocation"]["alpha"][0];
  CHECK(json::parse(json(alpha).dump()).get<double>() == alpha);
}

TEST_CASE("output file") {
  const std::string path = "cli_report.json";
  const auto r = invoke({"validate", "--input", fixture("three_peer.json"), "--output", path});
  CHECK(r.code == 0);
  CHECK(r.out.empty());
  std::ifstream in(path);
  CHECK(json::parse(in)["validation"]["ok"] == true);
  std::remove(path.c_str());
}

TEST_CASE("spec parser") {
  using goldenrule::cli::InputError;
  using goldenrule::cli::parse_spec;
  CHECK_THROWS_AS(parse_spec(R"({"peers": [{"id": 2, "lambda0": 1, "mu": 2}], "routing": [[0]]})"), InputError);
  CHECK_THROWS_AS(parse_spec(R"({"peers": [{"id": 1, "lambda0": "x", "mu": 2}], "routing": [[0]]})"), InputError);
  CHECK_THROWS_AS(parse_spec(R"({"peers": [{"id": 1, "lambda0": 1, "mu": 2}], "routing": [[0, 1]]})"), InputError);
  CHECK_THROWS_AS(parse_spec(R"({"peers": [{"id": 1, "lambda0": 1, "mu": 2}], "routing": [[0]], "x": 1})"), InputError);
  const auto ok = parse_spec(R"({"peers": [{"id": 1, "lambda0": 1, "mu": 2, "mu0": 1.5}], "routing": [[0]]})");
  CHECK(ok.spec.n == 1);
  REQUIRE(ok.mu0.has_value());
  CHECK((*ok.mu0)[0] == 1.5);
}
