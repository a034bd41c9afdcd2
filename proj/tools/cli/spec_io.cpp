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

#include "spec_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace goldenrule::cli {

using nlohmann::json;

namespace {

double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw InputError(where + " must be a number");
  return j.get<double>();
}

}  // namespace

SpecFile parse_spec(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw InputError("top level must be an object");
  for (const auto& [key, _] : doc.items()) {
    if (key != "peers" && key != "routing" && key != "name" && key != "description") {
      throw InputError("unknown top-level key \"" + key + "\"");
    }
  }
  if (!doc.contains("peers") || !doc["peers"].is_array()) throw InputError("\"peers\" must be an array");
  if (!doc.contains("routing") || !doc["routing"].is_array()) throw InputError("\"routing\" must be an array");

  SpecFile out;
  if (doc.contains("name")) {
    if (!doc["name"].is_string()) throw InputError("\"name\" must be a string");
    out.name = doc["name"].get<std::string>();
  }
  const json& peers = doc["peers"];
  const std::size_t n = peers.size();
  if (n == 0) throw InputError("no peers");
  NetworkSpec& s = out.spec;
  s.n = n;
  s.lambda0.resize(n);
  s.mu.resize(n);
  Vector mu0(n);
  std::size_t with_mu0 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const json& p = peers[i];
    const std::string where = "peers[" + std::to_string(i) + "]";
    if (!p.is_object()) throw InputError(where + " must be an object");
    for (const auto& [key, _] : p.items()) {
      if (key != "id" && key != "lambda0" && key != "mu" && key != "mu0") {
        throw InputError(where + ": unknown key \"" + key + "\"");
      }
    }
    if (!p.contains("id") || !p["id"].is_number_integer() || p["id"].get<long long>() != static_cast<long long>(i + 1)) {
      throw InputError(where + ".id must be " + std::to_string(i + 1));
    }
    if (!p.contains("lambda0") || !p.contains("mu")) throw InputError(where + " needs lambda0 and mu");
    s.lambda0[i] = number(p["lambda0"], where + ".lambda0");
    s.mu[i] = number(p["mu"], where + ".mu");
    if (p.contains("mu0")) {
      mu0[i] = number(p["mu0"], where + ".mu0");
      ++with_mu0;
    }
  }
  if (with_mu0 != 0 && with_mu0 != n) throw InputError("mu0 must be given for every peer or none");
  if (with_mu0 == n) out.mu0 = std::move(mu0);

  const json& routing = doc["routing"];
  if (routing.size() != n) throw InputError("routing must have one row per peer");
  s.routing = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const json& row = routing[i];
    if (!row.is_array() || row.size() != n) {
      throw InputError("routing row " + std::to_string(i + 1) + " must have " + std::to_string(n) + " entries");
    }
    for (std::size_t j = 0; j < n; ++j) {
      s.routing(i, j) = number(row[j], "routing[" + std::to_string(i) + "][" + std::to_string(j) + "]");
    }
  }
  return out;
}

SpecFile read_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_spec(buf.str());
}

}  // namespace goldenrule::cli
