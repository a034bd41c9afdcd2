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
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "goldenrule/error.hpp"
#include "goldenrule/matrix.hpp"
#include "goldenrule/model.hpp"

namespace goldenrule {

inline constexpr double kUnsetDelta = std::numeric_limits<double>::infinity();

// Round-based simulation of peers computing B = (I - R)⁻¹ and the Perron
// vector of B̃ by the modified orthogonal iteration
//
//   B_k = I + B_{k-1} R,    v_k = normalize((B_k - diag B_k) v_{k-1}).
//
// Peer i owns row i of B_k and component i of v_k. Routing rows are flooded
// once (link-state) before round 1, so the B update is local; each round then
// exchanges eigenvector components and runs two reductions over a BFS
// spanning tree: the L2 norm, and the convergence test.

enum class MessageKind {
  kLinkState,          ///< one peer's routing row, flooded before round 1
  kVComponent,         ///< v_{k-1}[sender]
  kNormScalar,         ///< partial sums of squares (up) / norms (down)
  kConvergenceScalar,  ///< partial max deltas (up) / round decision (down)
  kLoadShare,          ///< Λ_i r_{i,j}, used by flow_balance_rounds
};

std::string_view to_string(MessageKind kind) noexcept;

struct Message {
  MessageKind kind;
  std::size_t sender;
  std::size_t receiver;
  std::size_t round;
  std::uint64_t seq;  ///< strictly increasing per sender
  Vector payload;
};

/// BFS tree over the undirected support of R, rooted at peer 0.
struct SpanningTree {
  std::size_t root = 0;
  std::vector<std::optional<std::size_t>> parent;
  std::vector<std::vector<std::size_t>> children;
};

SpanningTree build_spanning_tree(const Matrix& routing);

/// One simulated peer. It sees the rest of the network only through the
/// messages handed to `process`.
class Peer {
 public:
  Peer(std::size_t id, std::size_t n, Vector routing_row, double v0, std::optional<std::size_t> parent,
       std::vector<std::size_t> children, double tol, std::size_t oscillation_window);

  std::size_t id() const noexcept { return id_; }
  std::span<const double> routing_row() const noexcept { return routing_row_; }
  std::span<const double> b_row() const noexcept { return b_row_; }
  double v_local() const noexcept { return v_; }

  /// Round-0 link-state flood of this peer's routing row.
  std::vector<Message> announce_routing();
  /// Starts round k: local B update, then publish v_{k-1}[id].
  std::vector<Message> begin_round(std::size_t k);
  /// Handles one tick's inbox; returns the messages to send.
  std::vector<Message> process(std::span<const Message> inbox);

  bool round_complete() const noexcept { return round_done_; }
  bool converged() const noexcept { return converged_; }
  bool averaging() const noexcept { return averaging_; }
  double last_max_delta_v() const noexcept { return decided_dv_; }
  double last_max_delta_b() const noexcept { return decided_db_; }
  /// Rounds in which some entry of b_row decreased.
  std::size_t monotonicity_violations() const noexcept { return monotone_violations_; }

 private:
  Message make(MessageKind kind, std::size_t to, Vector payload);
  void on_v_component(const Message& m, std::vector<Message>& out);
  void on_norm(const Message& m, std::vector<Message>& out);
  void on_convergence(const Message& m, std::vector<Message>& out);
  void finish_norm_upward(std::vector<Message>& out);
  void apply_norm(double shifted_norm, double plain_norm, std::vector<Message>& out);
  void finish_convergence_upward(std::vector<Message>& out);
  void apply_decision(std::span<const double> decision, std::vector<Message>& out);

  std::size_t id_;
  std::size_t n_;
  Vector routing_row_;
  Matrix routing_;  // assembled from link-state messages
  std::size_t link_state_seen_ = 0;
  std::optional<std::size_t> parent_;
  std::vector<std::size_t> children_;
  double tol_;
  std::size_t oscillation_window_;

  Vector b_row_;
  double v_;
  Vector v_known_;
  std::size_t v_received_ = 0;
  double w_ = 0.0;          // (B̃_k v_{k-1})_id
  double z_ = 0.0;          // w_ or its averaged counterpart
  double sigma_ = 0.0;      // ‖B̃ v‖ from the previous round
  double delta_b_ = 0.0;
  double delta_v_ = 0.0;
  bool own_norm_ready_ = false;
  bool own_conv_ready_ = false;
  bool round_decreased_ = false;

  std::size_t round_ = 0;
  std::uint64_t seq_ = 0;
  Vector norm_partial_;
  std::size_t norm_children_ = 0;
  Vector conv_partial_;
  std::size_t conv_children_ = 0;
  bool round_done_ = true;
  bool converged_ = false;
  bool averaging_ = false;
  double decided_dv_ = kUnsetDelta;
  double decided_db_ = kUnsetDelta;
  std::size_t monotone_violations_ = 0;

  // Root only.
  double root_best_dv_ = kUnsetDelta;
  std::size_t root_stalled_ = 0;
};

struct DistributedOptions {
  double tol = 1e-9;
  std::size_t max_rounds = 10'000;
  /// Initial eigenvector; all-ones when neither this nor `seed` is set.
  std::optional<Vector> v0;
  /// Seeded uniform (0, 1] initial vector when `v0` is not given.
  std::optional<std::uint64_t> seed;
  /// Advance peers on worker threads within each tick.
  bool parallel = false;
  std::size_t oscillation_window = 100;
};

struct RoundTrace {
  std::size_t round = 0;
  double max_delta_v = 0.0;
  double max_delta_b = 0.0;
  std::size_t messages = 0;  ///< sent during this round
};

struct DistributedResult {
  Matrix b;
  Vector v;
  std::size_t rounds_used = 0;
  std::size_t message_count = 0;  ///< including the link-state flood
  bool converged = false;
  std::size_t monotonicity_violations = 0;
  std::vector<RoundTrace> trace;
};

class DistributedNoConvergence : public Error {
 public:
  DistributedNoConvergence(const std::string& message, DistributedResult last)
      : Error(ErrorCode::kNoConvergence, message), last_(std::move(last)) {}
  const DistributedResult& last() const noexcept { return last_; }

 private:
  DistributedResult last_;
};

/// Owns the peers and the message router.
class DistributedHarness {
 public:
  DistributedHarness(const NetworkSpec& spec, DistributedOptions options);

  /// One synchronous round (k.1 - k.3). Throws kNonFiniteState on any
  /// non-finite payload.
  void round_step();

  std::size_t rounds() const noexcept { return round_; }
  std::size_t message_count() const noexcept { return messages_; }
  bool converged() const;
  const Peer& peer(std::size_t i) const { return peers_.at(i); }
  std::size_t size() const noexcept { return peers_.size(); }
  const SpanningTree& tree() const noexcept { return tree_; }
  const std::vector<RoundTrace>& trace() const noexcept { return trace_; }

  /// Called on every message in flight, before delivery. Used by tests to
  /// observe or perturb traffic.
  void set_message_hook(std::function<void(Message&)> hook) { hook_ = std::move(hook); }

  /// Collects the peers' rows into a result (observer view).
  DistributedResult snapshot() const;

 private:
  void route(std::vector<std::vector<Message>>& outboxes);
  void run_ticks(std::vector<std::vector<Message>> outboxes);

  DistributedOptions options_;
  SpanningTree tree_;
  std::vector<Peer> peers_;
  std::vector<std::vector<Message>> inboxes_;
  std::function<void(Message&)> hook_;
  std::size_t round_ = 0;
  std::size_t messages_ = 0;
  std::size_t round_messages_ = 0;
  std::vector<RoundTrace> trace_;
};

/// Rounds until both max|Δv| and max|Δb| fall below `tol`. Throws
/// DistributedNoConvergence (with the last iterates) after `max_rounds`.
DistributedResult run_until_converged(const NetworkSpec& spec, const DistributedOptions& options);

/// Convenience overload with default options otherwise.
DistributedResult run_until_converged(const NetworkSpec& spec, double tol, std::size_t max_rounds);

struct FlowRoundsResult {
  Vector lambda_total;
  std::size_t rounds = 0;
  std::size_t message_count = 0;
};

class FlowRoundsNoConvergence : public Error {
 public:
  FlowRoundsNoConvergence(const std::string& message, FlowRoundsResult last)
      : Error(ErrorCode::kNoConvergence, message), last_(std::move(last)) {}
  const FlowRoundsResult& last() const noexcept { return last_; }

 private:
  FlowRoundsResult last_;
};

/// Jacobi iteration Λᵢ ← λ₀,ᵢ + Σⱼ Λⱼ r_{j,i}, each peer sending Λᵢ r_{i,j}
/// to its out-neighbours. Stops when max|ΔΛ| < tol.
FlowRoundsResult flow_balance_rounds(const NetworkSpec& spec, double tol, std::size_t max_rounds);

}  // namespace goldenrule
