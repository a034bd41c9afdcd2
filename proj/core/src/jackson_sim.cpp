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

#include "goldenrule/jackson_sim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <queue>
#include <random>
#include <sstream>
#include <thread>

#include "goldenrule/error.hpp"

namespace goldenrule {

namespace {

// splitmix64 finalizer; derives independent stream seeds.
std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

enum class Purpose : std::uint64_t { kArrival = 1, kService = 2, kRouting = 3 };

/// One named random stream per (replication, purpose, owner).
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t replication, Purpose purpose, std::uint64_t owner)
      : engine_(mix(mix(mix(seed) ^ replication) ^ (static_cast<std::uint64_t>(purpose) << 32 | owner))) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

 private:
  std::mt19937_64 engine_;
};

/// Piecewise-constant count with a lazily accumulated time integral.
struct Counter {
  std::uint64_t count = 0;
  double last = 0.0;
  double area = 0.0;

  void change(double t, bool up) {
    area += static_cast<double>(count) * (t - last);
    last = t;
    count = up ? count + 1 : count - 1;
  }
  double take(double t) {
    area += static_cast<double>(count) * (t - last);
    last = t;
    const double a = area;
    area = 0.0;
    return a;
  }
};

struct Batch {
  double duration = 0.0;
  Vector area_local, area_foreign, area_cross;
  Vector arrivals_local, arrivals_foreign;
  Vector sojourn_local, count_local, sojourn_foreign, count_foreign;
  Vector visits;
  Vector exogenous;
  Vector system_sum, system_count;

  explicit Batch(std::size_t n)
      : area_local(n), area_foreign(n), area_cross(n * n), arrivals_local(n), arrivals_foreign(n),
        sojourn_local(n), count_local(n), sojourn_foreign(n), count_foreign(n), visits(n * n),
        exogenous(n), system_sum(n), system_count(n) {}
};

struct Visit {
  Job job;
  double arrived = 0.0;
};

struct Event {
  double time;
  std::uint64_t seq;
  bool arrival;
  std::uint32_t index;  // peer for arrivals, queue for completions

  bool operator>(const Event& o) const { return time != o.time ? time > o.time : seq > o.seq; }
};

struct Replication {
  std::vector<Batch> batches;
  ReplicationSummary summary;
};

class Simulator {
 public:
  Simulator(const SimConfig& config, const FlowSolution& flow, std::uint64_t replication)
      : cfg_(config), n_(config.spec.n) {
    (void)flow;
    for (std::size_t i = 0; i < n_; ++i) arrival_streams_.emplace_back(cfg_.seed, replication, Purpose::kArrival, i);
    for (std::size_t q = 0; q < 2 * n_; ++q) {
      service_streams_.emplace_back(cfg_.seed, replication, Purpose::kService, q);
      routing_streams_.emplace_back(cfg_.seed, replication, Purpose::kRouting, q);
    }
    rate_.resize(2 * n_);
    for (std::size_t j = 0; j < n_; ++j) {
      rate_[2 * j] = cfg_.mu0[j];
      rate_[2 * j + 1] = cfg_.spec.mu[j] - cfg_.mu0[j];
    }
    queues_.resize(2 * n_);
    queue_counters_.resize(2 * n_);
    cross_counters_.resize(n_ * n_);
    counts_.resize(2 * n_);
  }

  Replication run() {
    const std::uint64_t horizon = cfg_.horizon;
    const auto warm = static_cast<std::uint64_t>(std::floor(cfg_.warmup * static_cast<double>(horizon)));
    const std::uint64_t span = horizon - warm;
    for (std::size_t b = 1; b <= cfg_.batches; ++b) {
      boundaries_.push_back(warm + (span * b) / cfg_.batches);
    }

    for (std::size_t i = 0; i < n_; ++i) {
      if (cfg_.spec.lambda0[i] > 0.0) schedule_arrival(i, 0.0);
    }
    if (warm == 0) open_window(0.0);

    std::uint64_t exogenous = 0;
    while (!events_.empty()) {
      const Event e = events_.top();
      events_.pop();
      ++out_.summary.event_count;
      now_ = e.time;
      if (e.arrival) {
        ++exogenous;
        const std::size_t i = e.index;
        if (active_) batch().exogenous[i] += 1.0;
        enqueue(Job{i, now_, 0}, i);
        schedule_arrival(i, now_);
        if (exogenous == warm) open_window(now_);
        if (active_ && exogenous == boundaries_[batch_index_]) close_batch(now_);
        if (exogenous == horizon) break;
      } else {
        complete(e.index);
      }
    }

    auto& s = out_.summary;
    s.sim_time = now_;
    s.local_counts.resize(n_);
    s.foreign_counts.resize(n_);
    for (std::size_t j = 0; j < n_; ++j) {
      counts_[2 * j].in_system = queues_[2 * j].size();
      counts_[2 * j + 1].in_system = queues_[2 * j + 1].size();
      s.local_counts[j] = counts_[2 * j];
      s.foreign_counts[j] = counts_[2 * j + 1];
    }
    return std::move(out_);
  }

 private:
  Batch& batch() { return out_.batches.back(); }

  void push(double t, bool arrival, std::size_t index) {
    events_.push(Event{t, seq_++, arrival, static_cast<std::uint32_t>(index)});
  }

  void schedule_arrival(std::size_t i, double t) {
    push(t + arrival_streams_[i].exponential(cfg_.spec.lambda0[i]), true, i);
  }

  void open_window(double t) {
    for (auto& c : queue_counters_) c.take(t);
    for (auto& c : cross_counters_) c.take(t);
    active_ = true;
    window_start_ = t;
    batch_start_ = t;
    batch_index_ = 0;
    out_.batches.emplace_back(n_);
  }

  void close_batch(double t) {
    Batch& b = batch();
    b.duration = t - batch_start_;
    for (std::size_t j = 0; j < n_; ++j) {
      b.area_local[j] = queue_counters_[2 * j].take(t);
      b.area_foreign[j] = queue_counters_[2 * j + 1].take(t);
    }
    for (std::size_t k = 0; k < n_ * n_; ++k) b.area_cross[k] = cross_counters_[k].take(t);
    batch_start_ = t;
    if (++batch_index_ == cfg_.batches) {
      active_ = false;
      out_.summary.observed_time = t - window_start_;
    } else {
      out_.batches.emplace_back(n_);
    }
  }

  void enqueue(Job job, std::size_t j) {
    const bool foreign = job.origin != j;
    const std::size_t q = 2 * j + (foreign ? 1 : 0);
    ++counts_[q].arrivals;
    queue_counters_[q].change(now_, true);
    cross_counters_[job.origin * n_ + j].change(now_, true);
    if (active_) {
      Batch& b = batch();
      (foreign ? b.arrivals_foreign : b.arrivals_local)[j] += 1.0;
      b.visits[job.origin * n_ + j] += 1.0;
    }
    queues_[q].push_back(Visit{job, now_});
    if (queues_[q].size() == 1) start_service(q);
  }

  void start_service(std::size_t q) { push(now_ + service_streams_[q].exponential(rate_[q]), false, q); }

  void complete(std::size_t q) {
    Visit visit = queues_[q].front();
    queues_[q].pop_front();
    const std::size_t j = q / 2;
    const bool foreign = (q % 2) == 1;
    ++counts_[q].departures;
    queue_counters_[q].change(now_, false);
    cross_counters_[visit.job.origin * n_ + j].change(now_, false);
    if (active_) {
      Batch& b = batch();
      const double sojourn = now_ - visit.arrived;
      if (foreign) {
        b.sojourn_foreign[j] += sojourn;
        b.count_foreign[j] += 1.0;
      } else {
        b.sojourn_local[j] += sojourn;
        b.count_local[j] += 1.0;
      }
    }
    if (!queues_[q].empty()) start_service(q);

    Job job = visit.job;
    ++job.hop_count;
    // Same forwarding law for both queues of a peer.
    const double u = routing_streams_[q].uniform();
    double cumulative = 0.0;
    const auto row = cfg_.spec.routing.row(j);
    for (std::size_t m = 0; m < n_; ++m) {
      cumulative += row[m];
      if (u < cumulative) {
        enqueue(job, m);
        return;
      }
    }
    if (active_) {
      batch().system_sum[job.origin] += now_ - job.birth_time;
      batch().system_count[job.origin] += 1.0;
    }
  }

  const SimConfig& cfg_;
  std::size_t n_;
  std::vector<Stream> arrival_streams_, service_streams_, routing_streams_;
  Vector rate_;
  std::vector<std::deque<Visit>> queues_;
  std::vector<Counter> queue_counters_;
  std::vector<Counter> cross_counters_;
  std::vector<QueueCounts> counts_;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> events_;
  std::vector<std::uint64_t> boundaries_;
  std::uint64_t seq_ = 0;
  double now_ = 0.0;
  bool active_ = false;
  double window_start_ = 0.0;
  double batch_start_ = 0.0;
  std::size_t batch_index_ = 0;
  Replication out_;
};

/// Ratio estimate Σnum/Σden with a batch-means standard error.
class RatioSamples {
 public:
  void add(double num, double den) {
    if (den <= 0.0) return;
    num_ += num;
    den_ += den;
    values_.push_back(num / den);
  }
  Estimate estimate() const {
    Estimate e;
    if (den_ > 0.0) e.mean = num_ / den_;
    e.std_error = batch_error(values_);
    return e;
  }
  static double batch_error(const Vector& values) {
    const std::size_t k = values.size();
    if (k < 2) return 0.0;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(k);
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(k - 1) / static_cast<double>(k));
  }

 private:
  double num_ = 0.0;
  double den_ = 0.0;
  Vector values_;
};

Estimate little_gap(const std::vector<Batch>& batches, bool foreign, std::size_t j) {
  Vector gaps;
  for (const Batch& b : batches) {
    const double count = (foreign ? b.count_foreign : b.count_local)[j];
    if (b.duration <= 0.0 || count <= 0.0) continue;
    const double l = (foreign ? b.area_foreign : b.area_local)[j] / b.duration;
    const double lambda = (foreign ? b.arrivals_foreign : b.arrivals_local)[j] / b.duration;
    const double w = (foreign ? b.sojourn_foreign : b.sojourn_local)[j] / count;
    gaps.push_back(l - lambda * w);
  }
  Estimate e;
  for (double g : gaps) e.mean += g;
  if (!gaps.empty()) e.mean /= static_cast<double>(gaps.size());
  e.std_error = RatioSamples::batch_error(gaps);
  return e;
}

void check_config(const SimConfig& config, const FlowSolution& flow) {
  if (config.horizon == 0) throw Error(ErrorCode::kInvalidArgument, "horizon must be positive");
  if (!(config.warmup >= 0.0 && config.warmup <= 0.5)) {
    throw Error(ErrorCode::kInvalidArgument, "warmup must lie in [0, 0.5]");
  }
  if (config.replications == 0) throw Error(ErrorCode::kInvalidArgument, "need at least one replication");
  if (config.batches == 0) throw Error(ErrorCode::kInvalidArgument, "need at least one batch");
  const auto warm = static_cast<std::uint64_t>(std::floor(config.warmup * static_cast<double>(config.horizon)));
  if (config.horizon - warm < config.batches) {
    throw Error(ErrorCode::kInvalidArgument, "horizon too short for the requested number of batches");
  }
  if (!config.alpha.empty() && config.alpha.size() != config.spec.n) {
    throw Error(ErrorCode::kDimensionMismatch, "alpha length differs from peer count");
  }
  if (config.mu0.size() != config.spec.n) throw Error(ErrorCode::kDimensionMismatch, "mu0 length");
  const ValidationReport stability = check_stability(config.spec, flow, config.mu0);
  if (!stability.ok()) {
    std::ostringstream os;
    for (const auto& v : stability.violations) os << (os.tellp() > 0 ? "; " : "") << v.message;
    throw Error(ErrorCode::kUnstableConfig, os.str());
  }
  bool any_demand = false;
  for (double l : config.spec.lambda0) any_demand = any_demand || l > 0.0;
  if (!any_demand) throw Error(ErrorCode::kInvalidArgument, "no exogenous demand to simulate");
}

}  // namespace

SimReport simulate(const SimConfig& config) {
  check_dimensions(config.spec);
  const FlowSolution flow = solve_flow_balance(config.spec);
  check_config(config, flow);

  const std::size_t reps = config.replications;
  std::vector<Replication> results(reps);
  const auto run_one = [&](std::size_t r) { results[r] = Simulator(config, flow, r).run(); };
  if (config.parallel && reps > 1) {
    const std::size_t workers = std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, reps);
    std::vector<std::exception_ptr> errors(workers);
    {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          try {
            for (std::size_t r = w; r < reps; r += workers) run_one(r);
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
    for (std::size_t r = 0; r < reps; ++r) run_one(r);
  }

  const std::size_t n = config.spec.n;
  std::vector<RatioSamples> l_local(n), l_foreign(n), local_delay(n), foreign_delay(n), system(n),
      exo(n), arr_local(n), arr_foreign(n), cross(n * n), visits(n * n);
  std::vector<Vector> disutility_batches(n);

  SimReport report;
  for (const Replication& rep : results) {
    for (const Batch& b : rep.batches) {
      for (std::size_t j = 0; j < n; ++j) {
        l_local[j].add(b.area_local[j], b.duration);
        l_foreign[j].add(b.area_foreign[j], b.duration);
        local_delay[j].add(b.sojourn_local[j], b.count_local[j]);
        foreign_delay[j].add(b.sojourn_foreign[j], b.count_foreign[j]);
        system[j].add(b.system_sum[j], b.system_count[j]);
        exo[j].add(b.exogenous[j], b.duration);
        arr_local[j].add(b.arrivals_local[j], b.duration);
        arr_foreign[j].add(b.arrivals_foreign[j], b.duration);
      }
      for (std::size_t k = 0; k < n * n; ++k) {
        cross[k].add(b.area_cross[k], b.duration);
        visits[k].add(b.visits[k], b.duration);
      }
      if (!config.alpha.empty()) {
        for (std::size_t i = 0; i < n; ++i) {
          if (b.exogenous[i] <= 0.0 || b.count_foreign[i] <= 0.0) continue;
          double occupancy = 0.0;
          for (std::size_t j = 0; j < n; ++j) occupancy += b.area_cross[i * n + j];
          disutility_batches[i].push_back(occupancy / b.exogenous[i] +
                                          config.alpha[i] * b.sojourn_foreign[i] / b.count_foreign[i]);
        }
      }
    }
    ReplicationSummary summary = rep.summary;
    summary.little_gap_local.resize(n);
    summary.little_gap_foreign.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      summary.little_gap_local[j] = little_gap(rep.batches, false, j);
      summary.little_gap_foreign[j] = little_gap(rep.batches, true, j);
    }
    report.event_count += summary.event_count;
    report.sim_time += summary.observed_time;
    report.replications.push_back(std::move(summary));
  }

  const auto collect = [](const std::vector<RatioSamples>& samples) {
    EstimateVector out;
    for (const auto& s : samples) out.push_back(s.estimate());
    return out;
  };
  report.l_local = collect(l_local);
  report.l_foreign = collect(l_foreign);
  report.local_delay = collect(local_delay);
  report.foreign_delay = collect(foreign_delay);
  report.system_time = collect(system);
  report.exogenous_rate = collect(exo);
  report.local_arrival_rate = collect(arr_local);
  report.foreign_arrival_rate = collect(arr_foreign);
  report.l_cross = EstimateMatrix(n);
  report.visit_rate = EstimateMatrix(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      report.l_cross(i, j) = cross[i * n + j].estimate();
      report.visit_rate(i, j) = visits[i * n + j].estimate();
    }
  }
  if (!config.alpha.empty()) {
    for (std::size_t i = 0; i < n; ++i) {
      Estimate e;
      const double rate = report.exogenous_rate[i].mean;
      if (rate > 0.0) {
        double occupancy = 0.0;
        for (std::size_t j = 0; j < n; ++j) occupancy += report.l_cross(i, j).mean;
        e.mean = occupancy / rate + config.alpha[i] * report.foreign_delay[i].mean;
      }
      e.std_error = RatioSamples::batch_error(disutility_batches[i]);
      report.disutility.push_back(e);
    }
  }
  return report;
}

GoldenRuleTable verify_golden_rule(const SimReport& report, const FlowSolution& flow,
                                   const GoldenRuleAllocation& alloc) {
  const std::size_t n = report.foreign_delay.size();
  if (flow.b.rows() != n) throw Error(ErrorCode::kDimensionMismatch, "flow and report sizes differ");
  GoldenRuleTable t;
  t.kappa = alloc.kappa;
  t.ratio.resize(n);
  t.occupancy_ratio.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double own = report.foreign_delay[i].mean;
    double weighted = 0.0;
    double occupancy = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      weighted += flow.b(i, j) * report.foreign_delay[j].mean;
      occupancy += report.l_cross(i, j).mean;
    }
    t.ratio[i] = weighted / own;
    const double rate = report.exogenous_rate[i].mean;
    t.occupancy_ratio[i] = rate > 0.0 ? occupancy / rate / own : 0.0;
  }
  const auto [lo, hi] = std::minmax_element(t.ratio.begin(), t.ratio.end());
  t.spread = n == 0 ? 0.0 : *hi - *lo;
  for (double r : t.ratio) {
    t.max_relative_deviation = std::max(t.max_relative_deviation, std::abs(r - t.kappa) / t.kappa);
  }
  return t;
}

}  // namespace goldenrule
