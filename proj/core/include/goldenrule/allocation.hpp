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

#include "goldenrule/flowbalance.hpp"
#include "goldenrule/matrix.hpp"
#include "goldenrule/model.hpp"
#include "goldenrule/spectral.hpp"

namespace goldenrule {

/// Per-peer altruism factors and the Nash split of service capacity.
struct GoldenRuleAllocation {
  Vector alpha;
  Vector mu0;         ///< local-queue service rate
  Vector mu_foreign;  ///< μ - μ₀
  double kappa = 0.0;
};

/// Analytic Jackson-network occupancies and delays for a given split.
struct QueueStats {
  Vector l_local;    ///< L_{i,i}
  Vector l_foreign;  ///< L_j, whole foreign queue at j
  /// L_{i,j}: origin-i jobs in j's foreign queue; the diagonal holds L_{i,i}.
  Matrix l_cross;
  Vector local_delay;    ///< mean sojourn in the local queue
  Vector foreign_delay;  ///< mean sojourn in the foreign queue
  Vector disutility;     ///< C_i
};

/// Closed-form evaluation of every L and C_i. Throws kUnstable when any
/// queue has non-positive spare capacity.
QueueStats queue_stats(const NetworkSpec& spec, const FlowSolution& flow,
                       std::span<const double> mu0, std::span<const double> alpha);

/// C_i alone, for a full μ₀ vector. Throws kUnstable.
double disutility(const NetworkSpec& spec, const FlowSolution& flow, std::span<const double> mu0,
                  double alpha_i, std::size_t i);

/// Unique Nash equilibrium of the local/foreign split:
///   μ₀,ᵢ = √bᵢᵢ/(√bᵢᵢ + √αᵢ)·(μᵢ - Λᵢ) + bᵢᵢλ₀,ᵢ
/// Throws kInfeasibleCapacity if μᵢ ≤ Λᵢ for any peer.
Vector nash_mu0(const NetworkSpec& spec, const FlowSolution& flow, std::span<const double> alpha);

/// αᵢ = bᵢᵢ(vᵢ(μᵢ - Λᵢ) - 1)⁻², the altruism that makes the foreign-queue
/// delay at every peer proportional to the eigenvector. Throws kInfeasible
/// naming each peer with vᵢ(μᵢ - Λᵢ) ≤ 1 and its capacity shortfall.
Vector golden_alphas(const FlowSolution& flow, const EigenPair& eig, const NetworkSpec& spec);

/// 1/vᵢ + Λᵢ, the capacity each peer must exceed.
Vector feasibility_threshold(const FlowSolution& flow, const EigenPair& eig);

/// vᵢ = (1 + √(bᵢᵢ/αᵢ)) / (μᵢ - Λᵢ), the inverse of golden_alphas.
Vector reconstruct_eigenvector(const NetworkSpec& spec, const FlowSolution& flow,
                               std::span<const double> alpha);

/// Σ_{j≠i} b_{i,j} v_j / v_i with v reconstructed from α. Every entry equals
/// κ when α satisfies the golden rule.
Vector golden_rule_ratios(const NetworkSpec& spec, const FlowSolution& flow,
                          std::span<const double> alpha);

enum class FeasibilityMode { kFail, kAugmentCapacity, kThinDemand };

/// Returns a spec satisfying μᵢ > 1/vᵢ + Λᵢ.
///  - kAugmentCapacity raises μᵢ to (1 + margin)(1/vᵢ + Λᵢ) where short;
///  - kThinDemand scales λ₀ by θ = min(1, (1 - margin)·minᵢ (μᵢ - 1/vᵢ)/Λᵢ);
///  - kFail throws kInfeasible if the spec is not already feasible.
/// The input spec is never modified.
NetworkSpec ensure_feasible(const NetworkSpec& spec, const FlowSolution& flow, const EigenPair& eig,
                            FeasibilityMode mode, double margin = 0.05);

struct PipelineOptions {
  FeasibilityMode feasibility = FeasibilityMode::kFail;
  double margin = 0.05;
  PowerIterationOptions power;
};

struct PipelineResult {
  NetworkSpec spec;  ///< after any feasibility adjustment
  FlowSolution flow;
  EigenPair eigen;
  GoldenRuleAllocation allocation;
  QueueStats stats;
};

/// flow balance → Perron pair → feasibility → α → μ₀ → queue stats.
/// Errors carry the name of the failing stage.
PipelineResult golden_rule_pipeline(const NetworkSpec& spec, const PipelineOptions& options = {});

struct DerivativeEstimate {
  double first = 0.0;
  double second = 0.0;
};

/// Central finite differences of C_i in μ₀,ᵢ, with every other peer held at
/// its Nash rate. Throws kUnstable if any evaluation point is unstable.
DerivativeEstimate disutility_derivative_check(const NetworkSpec& spec, const FlowSolution& flow,
                                               std::span<const double> alpha, std::size_t i,
                                               double mu0_i, double h);

}  // namespace goldenrule
