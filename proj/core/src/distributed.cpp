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

#include "goldenrule/distributed.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>
#include <sstream>
#include <thread>

namespace goldenrule {

std::string_view to_string(MessageKind kind) noexcept {
  switch (kind) {
    case MessageKind::kLinkState: return "LINK_STATE";
    case MessageKind::kVComponent: return "V_COMPONENT";
    case MessageKind::kNormScalar: return "NORM_SCALAR";
    case MessageKind::kConvergenceScalar: return "CONVERGENCE_SCALAR";
    case MessageKind::kLoadShare: return "LOAD_SHARE";
  }
  return "UNKNOWN";
}

SpanningTree build_spanning_tree(const Matrix& routing) {
  const std::size_t n = routing.rows();
  SpanningTree tree;
  tree.parent.assign(n, std::nullopt);
  tree.children.assign(n, {});
  if (n == 0) return tree;
  std::vector<bool> seen(n, false);
  std::deque<std::size_t> queue{tree.root};
  seen[tree.root] = true;
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop_front();
    for (std::size_t w = 0; w < n; ++w) {
      if (seen[w] || (routing(u, w) <= 0.0 && routing(w, u) <= 0.0)) continue;
      seen[w] = true;
      tree.parent[w] = u;
      tree.children[u].push_back(w);
      queue.push_back(w);
    }
  }
  if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; })) {
    throw Error(ErrorCode::kInvalidArgument, "forwarding graph is disconnected");
  }
  return tree;
}

// ---------------------------------------------------------------------------
// Peer

Peer::Peer(std::size_t id, std::size_t n, Vector routing_row, double v0,
           std::optional<std::size_t> parent, std::vector<std::size_t> children, double tol,
           std::size_t oscillation_window)
    : id_(id),
      n_(n),
      routing_row_(std::move(routing_row)),
      routing_(n, n),
      parent_(parent),
      children_(std::move(children)),
      tol_(tol),
      oscillation_window_(oscillation_window),
      b_row_(n, 0.0),
      v_(v0),
      v_known_(n, 0.0) {
  b_row_[id_] = 1.0;  // B_0 = I
  std::copy(routing_row_.begin(), routing_row_.end(), routing_.row(id_).begin());
  link_state_seen_ = 1;
}

Message Peer::make(MessageKind kind, std::size_t to, Vector payload) {
  return Message{kind, id_, to, round_, seq_++, std::move(payload)};
}

std::vector<Message> Peer::announce_routing() {
  std::vector<Message> out;
  for (std::size_t j = 0; j < n_; ++j) {
    if (j != id_) out.push_back(make(MessageKind::kLinkState, j, routing_row_));
  }
  return out;
}

std::vector<Message> Peer::begin_round(std::size_t k) {
  if (link_state_seen_ != n_) {
    throw Error(ErrorCode::kInvalidArgument, "round started before the link-state flood finished");
  }
  round_ = k;
  round_done_ = false;

  // k.1: row id of B_k = e_id + (row id of B_{k-1}) R
  Vector next(n_, 0.0);
  for (std::size_t m = 0; m < n_; ++m) {
    const double bm = b_row_[m];
    if (bm == 0.0) continue;
    const auto r = routing_.row(m);
    for (std::size_t j = 0; j < n_; ++j) next[j] += bm * r[j];
  }
  next[id_] += 1.0;
  delta_b_ = 0.0;
  bool decreased = false;
  for (std::size_t j = 0; j < n_; ++j) {
    delta_b_ = std::max(delta_b_, std::abs(next[j] - b_row_[j]));
    if (next[j] < b_row_[j]) decreased = true;
  }
  if (decreased) ++monotone_violations_;
  b_row_ = std::move(next);

  v_known_[id_] = v_;
  v_received_ = 0;
  norm_partial_.assign(2, 0.0);
  norm_children_ = 0;
  conv_partial_.assign(3, 0.0);
  conv_children_ = 0;
  own_norm_ready_ = false;
  own_conv_ready_ = false;
  round_decreased_ = decreased;

  std::vector<Message> out;
  for (std::size_t j = 0; j < n_; ++j) {
    if (j != id_) out.push_back(make(MessageKind::kVComponent, j, {v_}));
  }
  return out;
}

std::vector<Message> Peer::process(std::span<const Message> inbox) {
  std::vector<Message> out;
  for (const Message& m : inbox) {
    switch (m.kind) {
      case MessageKind::kLinkState:
        std::copy(m.payload.begin(), m.payload.end(), routing_.row(m.sender).begin());
        ++link_state_seen_;
        break;
      case MessageKind::kVComponent: on_v_component(m, out); break;
      case MessageKind::kNormScalar: on_norm(m, out); break;
      case MessageKind::kConvergenceScalar: on_convergence(m, out); break;
      case MessageKind::kLoadShare: break;
    }
  }
  return out;
}

void Peer::on_v_component(const Message& m, std::vector<Message>& out) {
  v_known_[m.sender] = m.payload.at(0);
  if (++v_received_ < n_ - 1) return;

  // k.2: own component of (B_k - diag B_k) v_{k-1}
  w_ = 0.0;
  for (std::size_t j = 0; j < n_; ++j) {
    if (j != id_) w_ += b_row_[j] * v_known_[j];
  }
  z_ = averaging_ ? w_ + sigma_ * v_ : w_;
  norm_partial_[0] += z_ * z_;
  norm_partial_[1] += w_ * w_;
  own_norm_ready_ = true;
  finish_norm_upward(out);
}

void Peer::finish_norm_upward(std::vector<Message>& out) {
  if (!own_norm_ready_ || norm_children_ != children_.size()) return;
  if (parent_) {
    out.push_back(make(MessageKind::kNormScalar, *parent_, norm_partial_));
  } else {
    apply_norm(std::sqrt(norm_partial_[0]), std::sqrt(norm_partial_[1]), out);
  }
}

void Peer::on_norm(const Message& m, std::vector<Message>& out) {
  if (parent_ && m.sender == *parent_) {
    apply_norm(m.payload.at(0), m.payload.at(1), out);
    return;
  }
  norm_partial_[0] += m.payload.at(0);
  norm_partial_[1] += m.payload.at(1);
  ++norm_children_;
  finish_norm_upward(out);
}

void Peer::apply_norm(double shifted_norm, double plain_norm, std::vector<Message>& out) {
  for (std::size_t c : children_) {
    out.push_back(make(MessageKind::kNormScalar, c, {shifted_norm, plain_norm}));
  }
  const double next = z_ / shifted_norm;
  delta_v_ = std::abs(next - v_);
  v_ = next;
  sigma_ = plain_norm;

  // k.3 starts: reduce max deltas towards the root.
  conv_partial_[0] = std::max(conv_partial_[0], delta_v_);
  conv_partial_[1] = std::max(conv_partial_[1], delta_b_);
  conv_partial_[2] = std::max(conv_partial_[2], round_decreased_ ? 1.0 : 0.0);
  own_conv_ready_ = true;
  finish_convergence_upward(out);
}

void Peer::on_convergence(const Message& m, std::vector<Message>& out) {
  if (parent_ && m.sender == *parent_) {
    apply_decision(m.payload, out);
    return;
  }
  for (std::size_t k = 0; k < conv_partial_.size(); ++k) {
    conv_partial_[k] = std::max(conv_partial_[k], m.payload.at(k));
  }
  ++conv_children_;
  finish_convergence_upward(out);
}

void Peer::finish_convergence_upward(std::vector<Message>& out) {
  if (!own_conv_ready_ || conv_children_ != children_.size()) return;
  if (parent_) {
    out.push_back(make(MessageKind::kConvergenceScalar, *parent_, conv_partial_));
    return;
  }
  const double dv = conv_partial_[0];
  const double db = conv_partial_[1];
  const bool converged = dv < tol_ && db < tol_;
  if (dv < root_best_dv_) {
    root_best_dv_ = dv;
    root_stalled_ = 0;
  } else {
    ++root_stalled_;
  }
  const bool averaging = averaging_ || root_stalled_ >= oscillation_window_;
  const Vector decision{converged ? 1.0 : 0.0, averaging ? 1.0 : 0.0, dv, db};
  apply_decision(decision, out);
}

void Peer::apply_decision(std::span<const double> decision, std::vector<Message>& out) {
  for (std::size_t c : children_) {
    out.push_back(make(MessageKind::kConvergenceScalar, c, Vector(decision.begin(), decision.end())));
  }
  converged_ = decision[0] != 0.0;
  averaging_ = decision[1] != 0.0;
  decided_dv_ = decision[2];
  decided_db_ = decision[3];
  round_done_ = true;
}

// ---------------------------------------------------------------------------
// Harness

namespace {

Vector initial_vector(std::size_t n, const DistributedOptions& options) {
  if (options.v0) {
    const Vector& v0 = *options.v0;
    if (v0.size() != n) throw Error(ErrorCode::kDimensionMismatch, "v0 length differs from peer count");
    bool positive = false;
    for (double x : v0) {
      if (!std::isfinite(x) || x < 0.0) {
        throw Error(ErrorCode::kInvalidArgument, "v0 must be finite and non-negative");
      }
      positive = positive || x > 0.0;
    }
    if (!positive) throw Error(ErrorCode::kInvalidArgument, "v0 must be non-zero");
    return v0;
  }
  if (options.seed) {
    std::mt19937_64 rng(*options.seed);
    // uniform on (0, 1]
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Vector v(n);
    for (double& x : v) x = 1.0 - unit(rng);
    return v;
  }
  return Vector(n, 1.0);
}

bool finite_payload(const Message& m) {
  return std::all_of(m.payload.begin(), m.payload.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

DistributedHarness::DistributedHarness(const NetworkSpec& spec, DistributedOptions options)
    : options_(std::move(options)) {
  check_dimensions(spec);
  const std::size_t n = spec.n;
  if (n < 2) throw Error(ErrorCode::kInvalidArgument, "distributed iteration needs at least two peers");
  if (!(options_.tol >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "tolerance must be non-negative");
  tree_ = build_spanning_tree(spec.routing);
  const Vector v0 = initial_vector(n, options_);
  peers_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = spec.routing.row(i);
    peers_.emplace_back(i, n, Vector(row.begin(), row.end()), v0[i], tree_.parent[i], tree_.children[i],
                        options_.tol, options_.oscillation_window);
  }
  inboxes_.assign(n, {});

  std::vector<std::vector<Message>> outboxes(n);
  for (std::size_t i = 0; i < n; ++i) outboxes[i] = peers_[i].announce_routing();
  run_ticks(std::move(outboxes));
}

void DistributedHarness::route(std::vector<std::vector<Message>>& outboxes) {
  for (auto& box : inboxes_) box.clear();
  // Sender order, then send order: every inbox is sorted by (sender, seq).
  for (auto& box : outboxes) {
    for (Message& m : box) {
      if (hook_) hook_(m);
      if (!finite_payload(m)) {
        std::ostringstream os;
        os << to_string(m.kind) << " from peer " << m.sender + 1 << " to peer " << m.receiver + 1
           << " in round " << m.round << " carries a non-finite payload";
        throw Error(ErrorCode::kNonFiniteState, os.str());
      }
      ++messages_;
      ++round_messages_;
      inboxes_.at(m.receiver).push_back(std::move(m));
    }
    box.clear();
  }
}

void DistributedHarness::run_ticks(std::vector<std::vector<Message>> outboxes) {
  const std::size_t n = peers_.size();
  while (true) {
    route(outboxes);
    const bool idle = std::all_of(inboxes_.begin(), inboxes_.end(),
                                  [](const auto& box) { return box.empty(); });
    if (idle) return;

    if (options_.parallel && n > 1) {
      const std::size_t workers = std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, n);
      std::vector<std::exception_ptr> errors(workers);
      {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
          pool.emplace_back([&, w] {
            try {
              for (std::size_t i = w; i < n; i += workers) outboxes[i] = peers_[i].process(inboxes_[i]);
            } catch (...) {
              errors[w] = std::current_exception();
            }
          });
        }
      }
      for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) outboxes[i] = peers_[i].process(inboxes_[i]);
    }
  }
}

void DistributedHarness::round_step() {
  ++round_;
  round_messages_ = 0;
  const std::size_t n = peers_.size();
  std::vector<std::vector<Message>> outboxes(n);
  for (std::size_t i = 0; i < n; ++i) outboxes[i] = peers_[i].begin_round(round_);
  run_ticks(std::move(outboxes));
  for (const Peer& p : peers_) {
    if (!p.round_complete()) {
      throw Error(ErrorCode::kInvalidArgument, "round ended with a peer still waiting for messages");
    }
  }
  trace_.push_back({round_, peers_.front().last_max_delta_v(), peers_.front().last_max_delta_b(),
                    round_messages_});
}

bool DistributedHarness::converged() const { return round_ > 0 && peers_.front().converged(); }

DistributedResult DistributedHarness::snapshot() const {
  const std::size_t n = peers_.size();
  DistributedResult r;
  r.b = Matrix(n, n);
  r.v.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = peers_[i].b_row();
    std::copy(row.begin(), row.end(), r.b.row(i).begin());
    r.v[i] = peers_[i].v_local();
    r.monotonicity_violations += peers_[i].monotonicity_violations();
  }
  r.rounds_used = round_;
  r.message_count = messages_;
  r.converged = converged();
  r.trace = trace_;
  return r;
}

DistributedResult run_until_converged(const NetworkSpec& spec, const DistributedOptions& options) {
  DistributedHarness harness(spec, options);
  while (harness.rounds() < options.max_rounds) {
    harness.round_step();
    if (harness.converged()) return harness.snapshot();
  }
  std::ostringstream os;
  os << "not converged after " << harness.rounds() << " rounds (tol " << options.tol << ")";
  throw DistributedNoConvergence(os.str(), harness.snapshot());
}

DistributedResult run_until_converged(const NetworkSpec& spec, double tol, std::size_t max_rounds) {
  DistributedOptions options;
  options.tol = tol;
  options.max_rounds = max_rounds;
  return run_until_converged(spec, options);
}

FlowRoundsResult flow_balance_rounds(const NetworkSpec& spec, double tol, std::size_t max_rounds) {
  check_dimensions(spec);
  const std::size_t n = spec.n;
  FlowRoundsResult state;
  state.lambda_total = spec.lambda0;  // Λ⁰ = λ₀
  std::vector<std::uint64_t> seq(n, 0);

  while (state.rounds < max_rounds) {
    ++state.rounds;
    std::vector<std::vector<Message>> inbox(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double r = spec.routing(i, j);
        if (r <= 0.0) continue;
        Message m{MessageKind::kLoadShare, i, j, state.rounds, seq[i]++, {state.lambda_total[i] * r}};
        if (!finite_payload(m)) throw Error(ErrorCode::kNonFiniteState, "load share is not finite");
        inbox[j].push_back(std::move(m));
        ++state.message_count;
      }
    }
    double delta = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double next = spec.lambda0[j];
      for (const Message& m : inbox[j]) next += m.payload[0];
      delta = std::max(delta, std::abs(next - state.lambda_total[j]));
      state.lambda_total[j] = next;
    }
    if (delta < tol) return state;
  }
  std::ostringstream os;
  os << "flow balance not converged after " << state.rounds << " rounds";
  throw FlowRoundsNoConvergence(os.str(), state);
}

}  // namespace goldenrule
