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
#include <span>

#include "goldenrule/matrix.hpp"
#include "goldenrule/model.hpp"

namespace goldenrule {

/// Solution of the traffic equations Λᵀ(I - R) = λ₀ᵀ.
struct FlowSolution {
  Matrix b;            ///< B = (I - R)⁻¹; b(i, j) = mean visits to j per query born at i
  Matrix b_tilde;      ///< B with its diagonal zeroed
  Vector lambda_total; ///< Λ, total arrival rate at each peer
  Vector r0;           ///< resolution probabilities

  /// b(i, i) λ₀,ᵢ: rate into peer i's local queue.
  Vector local_load(std::span<const double> lambda0) const;
  /// Λᵢ - b(i, i) λ₀,ᵢ: rate into peer i's foreign queue.
  Vector foreign_load(std::span<const double> lambda0) const;
};

/// Pivot threshold (relative to max |I - R|) below which I - R is singular.
inline constexpr double kSingularPivotTolerance = 1e-12;
/// Relative residual bound on Λᵀ(I - R) = λ₀ᵀ.
inline constexpr double kFlowResidualTolerance = 1e-10;

/// Direct LU solve. Does not run validate_spec; the caller is expected to.
/// Throws kSingularSystem when I - R is numerically singular.
FlowSolution solve_flow_balance(const NetworkSpec& spec);

/// Partial Neumann sum I + R + … + R^terms.
Matrix neumann_b(const Matrix& routing, std::size_t terms);

/// Checks μ₀,ᵢ > bᵢᵢλ₀,ᵢ and μᵢ - μ₀,ᵢ > Λᵢ - bᵢᵢλ₀,ᵢ for every peer.
ValidationReport check_stability(const NetworkSpec& spec, const FlowSolution& flow,
                                 std::span<const double> mu0);

}  // namespace goldenrule
