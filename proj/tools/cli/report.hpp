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

#pragma once

#include <string>

#include "goldenrule/allocation.hpp"
#include "goldenrule/distributed.hpp"
#include "goldenrule/jackson_sim.hpp"
#include "json.hpp"

namespace goldenrule::cli {

using nlohmann::ordered_json;

ordered_json to_json(const Matrix& m);
ordered_json to_json(const Vector& v);
ordered_json to_json(const ValidationReport& report);
ordered_json to_json(const FlowSolution& flow);
ordered_json to_json(const EigenPair& eig);
ordered_json to_json(const QueueStats& stats);
ordered_json to_json(const SimReport& report);
ordered_json to_json(const GoldenRuleTable& table);
ordered_json to_json(const DistributedResult& result);
ordered_json error_json(const Error& e);

/// One line per scalar: section,field,i,j,value with 1-based indices.
/// Vectors fill i; matrices fill i and j.
std::string to_csv(const ordered_json& report);

}  // namespace goldenrule::cli
