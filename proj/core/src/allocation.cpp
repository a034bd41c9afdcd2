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

#include "goldenrule/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "goldenrule/error.hpp"

namespace goldenrule {

namespace {

void require_size(std::span<const double> v, std::size_t n, const char* what) {
  if (v.size() != n) {
    throw Error(ErrorCode::kDimensionMismatch, std::string(what) + " length differs from peer count");
  }
}

double local_spare(const NetworkSpec& spec, const FlowSolution& flow, std::span<const double> mu0,
                   std::size_t i) {
  return mu0[i] - flow.b(i, i) * spec.lambda0[i];
}

double foreign_spare(const NetworkSpec& spec, const FlowSolution& flow,
                     std::span<const double> mu0, std::size_t i) {
  return spec.mu[i] - mu0[i] - (flow.lambda_total[i] - flow.b(i, i) * spec.lambda0[i]);
}

[[noreturn]] void throw_unstable(std::size_t i, const char* queue, double spare) {
  std::ostringstream os;
  os << "peer " << i + 1 << " " << queue << " queue has spare capacity " << spare;
  throw Error(ErrorCode::kUnstable, os.str());
}

}  // namespace

QueueStats queue_stats(const NetworkSpec& spec, const FlowSolution& flow,
                       std::span<const double> mu0, std::span<const double> alpha) {
  check_dimensions(spec);
  const std::size_t n = spec.n;
  require_size(mu0, n, "mu0");
  require_size(alpha, n, "alpha");

  Vector local_den(n), foreign_den(n);
  for (std::size_t i = 0; i < n; ++i) {
    local_den[i] = local_spare(spec, flow, mu0, i);
    foreign_den[i] = foreign_spare(spec, flow, mu0, i);
    if (!(local_den[i] > 0.0)) throw_unstable(i, "local", local_den[i]);
    if (!(foreign_den[i] > 0.0)) throw_unstable(i, "foreign", foreign_den[i]);
  }

  QueueStats s;
  s.l_local.resize(n);
  s.l_foreign.resize(n);
  s.local_delay.resize(n);
  s.foreign_delay.resize(n);
  s.disutility.resize(n);
  s.l_cross = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    const double local_load = flow.b(j, j) * spec.lambda0[j];
    s.l_local[j] = local_load / local_den[j];
    s.l_foreign[j] = (flow.lambda_total[j] - local_load) / foreign_den[j];
    s.local_delay[j] = 1.0 / local_den[j];
    s.foreign_delay[j] = 1.0 / foreign_den[j];
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      s.l_cross(i, j) = i == j ? s.l_local[i] : flow.b(i, j) * spec.lambda0[i] / foreign_den[j];
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    // Expanded form of (1/λ₀,ᵢ)Σⱼ L_{i,j}; stays finite when λ₀,ᵢ = 0.
    double c = flow.b(i, i) * s.local_delay[i];
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) c += flow.b(i, j) * s.foreign_delay[j];
    }
    s.disutility[i] = c + alpha[i] * s.foreign_delay[i];
  }
  return s;
}

double disutility(const NetworkSpec& spec, const FlowSolution& flow, std::span<const double> mu0,
                  double alpha_i, std::size_t i) {
  const std::size_t n = spec.n;
  require_size(mu0, n, "mu0");
  const double own_local = local_spare(spec, flow, mu0, i);
  if (!(own_local > 0.0)) throw_unstable(i, "local", own_local);
  double c = flow.b(i, i) / own_local;
  for (std::size_t j = 0; j < n; ++j) {
    if (j != i && flow.b(i, j) == 0.0) continue;
    const double spare = foreign_spare(spec, flow, mu0, j);
    if (!(spare > 0.0)) throw_unstable(j, "foreign", spare);
    if (j != i) c += flow.b(i, j) / spare;
  }
  return c + alpha_i / foreign_spare(spec, flow, mu0, i);
}

Vector nash_mu0(const NetworkSpec& spec, const FlowSolution& flow, std::span<const double> alpha) {
  check_dimensions(spec);
  const std::size_t n = spec.n;
  require_size(alpha, n, "alpha");
  std::ostringstream shortfall;
  bool feasible = true;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(spec.mu[i] > flow.lambda_total[i])) {
      feasible = false;
      shortfall << (shortfall.tellp() > 0 ? "; " : "") << "peer " << i + 1 << ": mu = " << spec.mu[i]
                << " <= Lambda = " << flow.lambda_total[i];
    }
    if (!(alpha[i] > 0.0) || !std::isfinite(alpha[i])) {
      throw Error(ErrorCode::kInvalidArgument, "alpha must be positive and finite");
    }
  }
  if (!feasible) throw Error(ErrorCode::kInfeasibleCapacity, shortfall.str());

  Vector mu0(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double sb = std::sqrt(flow.b(i, i));
    const double sa = std::sqrt(alpha[i]);
    mu0[i] = sb / (sb + sa) * (spec.mu[i] - flow.lambda_total[i]) + flow.b(i, i) * spec.lambda0[i];
  }
  return mu0;
}

Vector feasibility_threshold(const FlowSolution& flow, const EigenPair& eig) {
  const std::size_t n = flow.lambda_total.size();
  require_size(eig.v, n, "eigenvector");
  Vector t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = 1.0 / eig.v[i] + flow.lambda_total[i];
  return t;
}

Vector golden_alphas(const FlowSolution& flow, const EigenPair& eig, const NetworkSpec& spec) {
  check_dimensions(spec);
  const std::size_t n = spec.n;
  require_size(eig.v, n, "eigenvector");
  Vector alpha(n);
  std::ostringstream shortfall;
  bool feasible = true;
  for (std::size_t i = 0; i < n; ++i) {
    const double slack = eig.v[i] * (spec.mu[i] - flow.lambda_total[i]) - 1.0;
    if (!(slack > 0.0)) {
      feasible = false;
      shortfall.precision(6);
      shortfall << (shortfall.tellp() > 0 ? "; " : "") << "peer " << i + 1 << " short by "
                << 1.0 / eig.v[i] + flow.lambda_total[i] - spec.mu[i];
      continue;
    }
    alpha[i] = flow.b(i, i) / (slack * slack);
  }
  if (!feasible) throw Error(ErrorCode::kInfeasible, shortfall.str());
  return alpha;
}

Vector reconstruct_eigenvector(const NetworkSpec& spec, const FlowSolution& flow,
                               std::span<const double> alpha) {
  const std::size_t n = spec.n;
  require_size(alpha, n, "alpha");
  Vector v(n);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = (1.0 + std::sqrt(flow.b(i, i) / alpha[i])) / (spec.mu[i] - flow.lambda_total[i]);
  }
  return v;
}

Vector golden_rule_ratios(const NetworkSpec& spec, const FlowSolution& flow,
                          std::span<const double> alpha) {
  const Vector v = reconstruct_eigenvector(spec, flow, alpha);
  const Vector lhs = multiply(flow.b_tilde, v);
  Vector ratio(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) ratio[i] = lhs[i] / v[i];
  return ratio;
}

NetworkSpec ensure_feasible(const NetworkSpec& spec, const FlowSolution& flow, const EigenPair& eig,
                            FeasibilityMode mode, double margin) {
  check_dimensions(spec);
  const std::size_t n = spec.n;
  require_size(eig.v, n, "eigenvector");
  if (!(margin >= 0.0) || !(margin < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "margin must lie in [0, 1)");
  }
  const Vector threshold = feasibility_threshold(flow, eig);
  NetworkSpec out = spec;

  switch (mode) {
    case FeasibilityMode::kFail: {
      std::ostringstream os;
      bool ok = true;
      for (std::size_t i = 0; i < n; ++i) {
        if (!(spec.mu[i] > threshold[i])) {
          ok = false;
          os << (os.tellp() > 0 ? "; " : "") << "peer " << i + 1 << " short by "
             << threshold[i] - spec.mu[i];
        }
      }
      if (!ok) throw Error(ErrorCode::kInfeasible, os.str());
      return out;
    }
    case FeasibilityMode::kAugmentCapacity:
      for (std::size_t i = 0; i < n; ++i) out.mu[i] = std::max(spec.mu[i], (1.0 + margin) * threshold[i]);
      return out;
    case FeasibilityMode::kThinDemand: {
      double theta = 1.0;
      std::ostringstream os;
      for (std::size_t i = 0; i < n; ++i) {
        const double headroom = spec.mu[i] - 1.0 / eig.v[i];
        if (!(headroom > 0.0)) {
          os << (os.tellp() > 0 ? "; " : "") << "peer " << i + 1 << ": mu = " << spec.mu[i]
             << " <= 1/v = " << 1.0 / eig.v[i];
          continue;
        }
        if (flow.lambda_total[i] > 0.0) {
          theta = std::min(theta, (1.0 - margin) * headroom / flow.lambda_total[i]);
        }
      }
      if (os.tellp() > 0) throw Error(ErrorCode::kThinningImpossible, os.str());
      for (double& l : out.lambda0) l *= theta;
      return out;
    }
  }
  return out;
}

PipelineResult golden_rule_pipeline(const NetworkSpec& spec, const PipelineOptions& options) {
  const auto stage = [](const char* name, auto&& fn) {
    try {
      return fn();
    } catch (const Error& e) {
      throw e.with_stage(name);
    }
  };

  stage("validate", [&] {
    const ValidationReport report = validate_spec(spec);
    if (!report.ok()) {
      std::ostringstream os;
      for (const auto& v : report.violations) {
        os << (os.tellp() > 0 ? ", " : "") << to_string(v.code);
      }
      throw Error(ErrorCode::kInvalidSpec, os.str());
    }
    if (spec.n < 2) {
      throw Error(ErrorCode::kInvalidArgument, "golden rule needs at least two peers");
    }
    return 0;
  });

  PipelineResult out;
  out.spec = spec;
  out.flow = stage("flow_balance", [&] { return solve_flow_balance(spec); });
  out.eigen = stage("eigenvector", [&] { return perron_eigenpair(out.flow.b_tilde, options.power); });
  stage("feasibility", [&] {
    out.spec = ensure_feasible(spec, out.flow, out.eigen, options.feasibility, options.margin);
    return 0;
  });
  if (out.spec.lambda0 != spec.lambda0) {
    out.flow = stage("flow_balance", [&] { return solve_flow_balance(out.spec); });
  }
  auto& alloc = out.allocation;
  alloc.alpha = stage("alpha", [&] { return golden_alphas(out.flow, out.eigen, out.spec); });
  alloc.mu0 = stage("nash", [&] { return nash_mu0(out.spec, out.flow, alloc.alpha); });
  alloc.mu_foreign.resize(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) alloc.mu_foreign[i] = out.spec.mu[i] - alloc.mu0[i];
  alloc.kappa = out.eigen.kappa;
  out.stats = stage("queue_stats", [&] {
    return queue_stats(out.spec, out.flow, alloc.mu0, alloc.alpha);
  });
  return out;
}

DerivativeEstimate disutility_derivative_check(const NetworkSpec& spec, const FlowSolution& flow,
                                               std::span<const double> alpha, std::size_t i,
                                               double mu0_i, double h) {
  check_dimensions(spec);
  if (i >= spec.n) throw Error(ErrorCode::kInvalidArgument, "peer index out of range");
  if (!(h > 0.0)) throw Error(ErrorCode::kInvalidArgument, "step must be positive");
  Vector mu0 = nash_mu0(spec, flow, alpha);
  const auto at = [&](double x) {
    mu0[i] = x;
    return disutility(spec, flow, mu0, alpha[i], i);
  };
  const double minus = at(mu0_i - h);
  const double center = at(mu0_i);
  const double plus = at(mu0_i + h);
  return {(plus - minus) / (2.0 * h), (plus - 2.0 * center + minus) / (h * h)};
}

}  // namespace goldenrule
