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

#include <optional>
#include <stdexcept>
#include <string>

#include "goldenrule/matrix.hpp"
#include "goldenrule/model.hpp"

namespace goldenrule::cli {

/// Unreadable or structurally wrong input; maps to exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SpecFile {
  NetworkSpec spec;
  /// Per-peer local rates, present only if every peer carries "mu0".
  std::optional<Vector> mu0;
  std::string name;
};

/// Parses the JSON network format:
///   {"peers": [{"id": 1, "lambda0": .., "mu": .., "mu0"?: ..}, ...],
///    "routing": [[..], ...]}
SpecFile parse_spec(const std::string& text);
SpecFile read_spec(const std::string& path);

}  // namespace goldenrule::cli
