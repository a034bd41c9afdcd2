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
#include <cstdint>
#include <vector>

#include "goldenrule/allocation.hpp"
#include "goldenrule/flowbalance.hpp"
#include "goldenrule/matrix.hpp"
#include "goldenrule/model.hpp"

namespace goldenrule {

/// A query in flight. `origin` never changes; `hop_count` counts completed
/// services so far.
struct Job {
  std::size_t origin = 0;
  double birth_time = 0.0;
  std::uint32_t hop_count = 0;
};

struct SimConfig {
  NetworkSpec spec;
  Vector mu0;
  /// Exogenous arrivals (summed over peers) per replication.
  std::uint64_t horizon = 1'000'000;
  /// Leading fraction of the horizon discarded before statistics start.
  double warmup = 0.2;
  std::uint64_t seed = 1;
  std::size_t replications = 1;
  std::size_t batches = 20;
  /// Altruism factors; when empty the disutility estimate is omitted.
  Vector alpha;
  /// Run replications on worker threads (results are identical either way).
  bool parallel = true;
};

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
};

using EstimateVector = std::vector<Estimate>;

class EstimateMatrix {
 public:
  EstimateMatrix() = default;
  explicit EstimateMatrix(std::size_t n) : n_(n), data_(n * n) {}
  std::size_t size() const noexcept { return n_; }
  Estimate& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  const Estimate& operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

 private:
  std::size_t n_ = 0;
  std::vector<Estimate> data_;
};

/// Whole-run counters of one queue; arrivals - departures - in_system == 0.
struct QueueCounts {
  std::uint64_t arrivals = 0;
  std::uint64_t departures = 0;
  std::uint64_t in_system = 0;
};

struct ReplicationSummary {
  std::uint64_t event_count = 0;
  double sim_time = 0.0;       ///< end of the run
  double observed_time = 0.0;  ///< after warmup
  std::vector<QueueCounts> local_counts;
  std::vector<QueueCounts> foreign_counts;
  /// L - λW per queue for this replication, with batch-means errors.
  EstimateVector little_gap_local;
  EstimateVector little_gap_foreign;
};

struct SimReport {
  EstimateVector l_local;
  EstimateVector l_foreign;
  EstimateMatrix l_cross;  ///< origin i in j's foreign queue; diagonal = local queue
  EstimateVector local_delay;
  EstimateVector foreign_delay;
  EstimateVector system_time;     ///< per origin, exogenous arrival to resolution
  EstimateMatrix visit_rate;      ///< origin-i arrivals at peer j per unit time
  EstimateVector exogenous_rate;  ///< empirical λ₀
  EstimateVector local_arrival_rate;
  EstimateVector foreign_arrival_rate;
  EstimateVector disutility;  ///< empty unless SimConfig::alpha was given
  std::vector<ReplicationSummary> replications;
  std::uint64_t event_count = 0;
  double sim_time = 0.0;  ///< observed time summed over replications
};

/// Discrete-event simulation of the 2N-queue network: each peer has an
/// exclusive FCFS local server at rate μ₀ and a foreign server at rate
/// μ - μ₀. Throws kUnstableConfig when the split is not stable.
SimReport simulate(const SimConfig& config);

struct GoldenRuleTable {
  /// Σ_{j≠i} b_{i,j} D̂_j / D̂_i with D̂ the empirical foreign delays.
  Vector ratio;
  /// (Σ_{j≠i} L̂_{i,j} / λ̂₀,ᵢ) / D̂_i, purely from simulated occupancies.
  Vector occupancy_ratio;
  double kappa = 0.0;
  double spread = 0.0;  ///< max - min of `ratio`
  double max_relative_deviation = 0.0;  ///< max |ratio_i - κ| / κ
};

GoldenRuleTable verify_golden_rule(const SimReport& report, const FlowSolution& flow,
                                   const GoldenRuleAllocation& alloc);

}  // namespace goldenrule
