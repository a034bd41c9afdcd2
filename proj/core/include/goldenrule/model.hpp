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

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "goldenrule/matrix.hpp"

namespace goldenrule {

/// Static snapshot of a peer-to-peer query network.
///
/// `routing(i, j)` is the probability that peer i forwards a query it cannot
/// resolve to peer j; the resolution probability r_{i,0} is implicit as
/// 1 - (row sum). Rates are in queries per unit time.
struct NetworkSpec {
  std::size_t n = 0;
  Matrix routing;
  Vector lambda0;  ///< exogenous Poisson arrival rates
  Vector mu;       ///< total service capacities

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

enum class ViolationCode {
  kNegativeEntry,
  kRowSumExceedsOne,
  kNotStrictlySubstochastic,
  kNotIrreducible,
  kZeroDemand,
  kNonpositiveCapacity,
  kLocalUnstable,
  kForeignUnstable,
};

std::string_view to_string(ViolationCode code) noexcept;

struct Violation {
  ViolationCode code;
  std::optional<std::size_t> row;  ///< peer index or matrix row (0-based)
  std::optional<std::size_t> col;  ///< matrix column, when the violation is an entry
  std::string message;

  friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidationReport {
  std::vector<Violation> violations;
  /// Informational remarks that do not affect `ok()` (e.g. self-loops).
  std::vector<std::string> notes;

  bool ok() const noexcept { return violations.empty(); }
  bool has(ViolationCode code) const noexcept;

  friend bool operator==(const ValidationReport&, const ValidationReport&) = default;
};

/// Row sums up to 1 + kRowSumTolerance are accepted (r_{i,0} clamps to 0).
inline constexpr double kRowSumTolerance = 1e-12;

/// Throws Error(kDimensionMismatch) unless every field has shape n / n×n.
void check_dimensions(const NetworkSpec& spec);

/// Reports every violated structural hypothesis of the model. Dimension
/// mismatches throw instead of being reported.
ValidationReport validate_spec(const NetworkSpec& spec);

/// True iff the support digraph (edge i→j iff r_{i,j} > 0) is strongly
/// connected. Works on the support only, so 1e-300 counts as an edge.
bool check_irreducible(const Matrix& routing);

/// r_{i,0} = 1 - Σ_j r_{i,j}, clamped into [0, 1].
Vector resolution_probabilities(const Matrix& routing);

}  // namespace goldenrule
