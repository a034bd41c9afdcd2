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

#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "goldenrule/allocation.hpp"
#include "goldenrule/error.hpp"

using namespace goldenrule;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::kInvalidArgument;
}

/// Flow solution assembled from the rounded reference numbers.
FlowSolution rounded_flow() {
  FlowSolution f;
  f.b = fixtures::rounded::kB;
  f.b_tilde = f.b;
  for (std::size_t i = 0; i < 3; ++i) f.b_tilde(i, i) = 0.0;
  f.lambda_total = fixtures::rounded::kLambda;
  f.r0 = {1.0 / 6, 1.0 / 6, 1.0 / 3};
  return f;
}

EigenPair rounded_eigen() { return {fixtures::rounded::kKappa, fixtures::rounded::kV, 0, 0.0}; }

const double kSqrt2 = std::sqrt(2.0);

}  // namespace

TEST_CASE("queue stats: single M/M/1 local queue") {
  NetworkSpec s;
  s.n = 1;
  s.routing = Matrix(1, 1);
  s.lambda0 = {1.0};
  s.mu = {3.0};
  const auto flow = solve_flow_balance(s);
  const auto stats = queue_stats(s, flow, Vector{2.0}, Vector{1.0});
  CHECK(stats.l_local[0] == doctest::Approx(1.0));
  CHECK(stats.local_delay[0] == doctest::Approx(1.0));
  CHECK(stats.l_foreign[0] == 0.0);
}

TEST_CASE("queue stats: example network") {
  const auto s = fixtures::three_peer();
  const auto flow = solve_flow_balance(s);
  const Vector mu0{2.43, 3.75, 2.32};
  const auto stats = queue_stats(s, flow, mu0, fixtures::rounded::kAlpha);
  // 1 / (8 - 2.43 - (5.9375 - 2.0625)) = 1 / 1.695
  CHECK(stats.foreign_delay[0] == doctest::Approx(1.0 / 1.695).epsilon(1e-12));
  CHECK(std::abs(stats.foreign_delay[0] - 0.590) < 1e-3);
  for (std::size_t j = 0; j < 3; ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < 3; ++i)
      if (i != j) sum += stats.l_cross(i, j);
    CHECK(std::abs(stats.l_foreign[j] - sum) < 1e-10);
    CHECK(stats.l_cross(j, j) == stats.l_local[j]);
    CHECK(stats.l_local[j] >= 0.0);
    CHECK(std::isfinite(stats.disutility[j]));
  }
  SUBCASE("disutility equals per-origin occupancy over demand plus weighted foreign delay") {
    for (std::size_t i = 0; i < 3; ++i) {
      double occupancy = 0.0;
      for (std::size_t j = 0; j < 3; ++j) occupancy += stats.l_cross(i, j);
      const double expected = occupancy / s.lambda0[i] + fixtures::rounded::kAlpha[i] * stats.foreign_delay[i];
      CHECK(stats.disutility[i] == doctest::Approx(expected).epsilon(1e-12));
      CHECK(disutility(s, flow, mu0, fixtures::rounded::kAlpha[i], i) ==
            doctest::Approx(expected).epsilon(1e-12));
    }
  }
  SUBCASE("local boundary is unstable") {
    CHECK(code_of([&] { queue_stats(s, flow, Vector{2.0625, 3.75, 2.32}, fixtures::rounded::kAlpha); }) ==
          ErrorCode::kUnstable);
  }
}

TEST_CASE("nash split") {
  SUBCASE("rounded chain, peer 1") {
    const auto mu0 = nash_mu0(fixtures::three_peer(), rounded_flow(), fixtures::rounded::kAlpha);
    CHECK(std::abs(mu0[0] - 2.43) < 0.005);
  }
  SUBCASE("alpha equal to b splits the spare capacity evenly") {
    NetworkSpec s;
    s.n = 1;
    s.routing = Matrix(1, 1);
    s.lambda0 = {1.0};
    s.mu = {5.0};
    const auto flow = solve_flow_balance(s);  // b = 1, Λ = 1
    const auto mu0 = nash_mu0(s, flow, Vector{1.0});
    CHECK(mu0[0] == doctest::Approx((5.0 - 1.0) / 2 + 1.0));
  }
  SUBCASE("symmetric two-peer network") {
    const auto s = fixtures::symmetric2();
    const auto flow = solve_flow_balance(s);
    CHECK(flow.b(0, 0) == doctest::Approx(4.0 / 3));
    CHECK(flow.b(0, 1) == doctest::Approx(2.0 / 3));
    CHECK(flow.lambda_total[0] == doctest::Approx(2.0));
    const double alpha = 4.0 + 8.0 * kSqrt2 / 3.0;
    const auto mu0 = nash_mu0(s, flow, Vector{alpha, alpha});
    // (√2 - 1)/√2 · 2 + 4/3
    const double expected = (kSqrt2 - 1.0) / kSqrt2 * 2.0 + 4.0 / 3.0;
    CHECK(mu0[0] == doctest::Approx(expected).epsilon(1e-12));
    CHECK(std::abs(mu0[0] - 1.9191) < 1e-4);
  }
  SUBCASE("capacity below total load") {
    NetworkSpec s = fixtures::three_peer();
    s.mu[1] = 5.0;
    const auto flow = solve_flow_balance(s);
    CHECK(code_of([&] { nash_mu0(s, flow, Vector{1.0, 1.0, 1.0}); }) == ErrorCode::kInfeasibleCapacity);
  }
}

TEST_CASE("golden alphas") {
  SUBCASE("rounded chain, peer 1") {
    const auto alpha = golden_alphas(rounded_flow(), rounded_eigen(), fixtures::three_peer());
    CHECK(std::abs(alpha[0] - 46.9) < 0.05);
  }
  SUBCASE("symmetric two-peer network") {
    const auto s = fixtures::symmetric2();
    const auto flow = solve_flow_balance(s);
    const auto eig = perron_eigenpair(flow.b_tilde);
    const auto alpha = golden_alphas(flow, eig, s);
    // (4/3)(√2 - 1)⁻² = (4/3)(3 + 2√2)
    CHECK(alpha[0] == doctest::Approx(4.0 + 8.0 * kSqrt2 / 3.0).epsilon(1e-12));
    CHECK(alpha[1] == doctest::Approx(7.7712).epsilon(1e-5));
  }
  SUBCASE("boundary v(mu - Lambda) = 1 is infeasible") {
    auto s = fixtures::symmetric2();
    const auto flow = solve_flow_balance(s);
    EigenPair eig{2.0 / 3, {0.5, 0.5}, 0, 0.0};  // v(μ - Λ) = 0.5 · 2 = 1
    CHECK(code_of([&] { golden_alphas(flow, eig, s); }) == ErrorCode::kInfeasible);
  }
}

TEST_CASE("feasibility adjustment") {
  const auto s = fixtures::three_peer();
  const auto flow = solve_flow_balance(s);
  const auto eig = perron_eigenpair(flow.b_tilde);

  SUBCASE("already feasible spec is returned unchanged") {
    CHECK(ensure_feasible(s, flow, eig, FeasibilityMode::kFail) == s);
    // μ₁ = 8 clears the bare threshold 7.674 but not the 5% margin
    const auto grown = ensure_feasible(s, flow, eig, FeasibilityMode::kAugmentCapacity);
    CHECK(grown.mu[0] == doctest::Approx(1.05 * fixtures::full_precision::kThreshold[0]).epsilon(1e-9));
    CHECK(grown.mu[1] == s.mu[1]);
    CHECK(grown.mu[2] == s.mu[2]);
    CHECK(ensure_feasible(s, flow, eig, FeasibilityMode::kThinDemand) == s);
  }
  SUBCASE("thinning binds at peer 1") {
    NetworkSpec tight = s;
    tight.mu = {7.5, 7.0, 9.0};
    const auto thinned = ensure_feasible(tight, flow, eig, FeasibilityMode::kThinDemand, 0.01);
    // θ = 0.99 (7.5 - 1/v₁) / 5.9375, with v₁ from the eigen solve
    const double theta = 0.99 * (7.5 - 1.0 / eig.v[0]) / 5.9375;
    CHECK(theta == doctest::Approx(0.96093).epsilon(1e-4));
    for (std::size_t i = 0; i < 3; ++i) CHECK(thinned.lambda0[i] == doctest::Approx(theta * s.lambda0[i]));
    CHECK(tight.lambda0 == s.lambda0);
    const auto thinned_flow = solve_flow_balance(thinned);
    const auto threshold = feasibility_threshold(thinned_flow, eig);
    for (std::size_t i = 0; i < 3; ++i) CHECK(thinned.mu[i] > threshold[i]);
    CHECK(code_of([&] { ensure_feasible(tight, flow, eig, FeasibilityMode::kFail); }) == ErrorCode::kInfeasible);
  }
  SUBCASE("augmenting capacity") {
    NetworkSpec tight = s;
    tight.mu = {7.5, 7.0, 9.0};
    const auto grown = ensure_feasible(tight, flow, eig, FeasibilityMode::kAugmentCapacity, 0.05);
    CHECK(grown.mu[0] == doctest::Approx(1.05 * (1.0 / eig.v[0] + flow.lambda_total[0])));
    CHECK(grown.mu[1] == 7.0);
    CHECK(grown.mu[2] == 9.0);
  }
  SUBCASE("no demand leaves the spec untouched") {
    NetworkSpec idle = s;
    idle.lambda0 = {0.0, 0.0, 0.0};
    const auto idle_flow = solve_flow_balance(idle);
    CHECK(ensure_feasible(idle, idle_flow, eig, FeasibilityMode::kThinDemand).lambda0 == idle.lambda0);
  }
  SUBCASE("capacity below 1/v cannot be fixed by thinning") {
    NetworkSpec tiny = s;
    tiny.mu[2] = 1.5;  // 1/v₃ ≈ 1.97
    CHECK(code_of([&] { ensure_feasible(tiny, flow, eig, FeasibilityMode::kThinDemand); }) ==
          ErrorCode::kThinningImpossible);
  }
}

TEST_CASE("pipeline on the example network, full precision") {
  const auto s = fixtures::three_peer();
  const auto result = golden_rule_pipeline(s);
  const auto& a = result.allocation;
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(a.alpha[i] == doctest::Approx(fixtures::full_precision::kAlpha[i]).epsilon(1e-8));
    CHECK(a.mu0[i] == doctest::Approx(fixtures::full_precision::kMu0[i]).epsilon(1e-10));
    CHECK(a.mu0[i] + a.mu_foreign[i] == s.mu[i]);
  }
  CHECK(a.kappa == doctest::Approx(fixtures::full_precision::kKappa).epsilon(1e-10));
  // alpha_1 is far from the rounded 46.9, which uses Λ₁ = 5.9.
  CHECK(a.alpha[0] > 58.0);
  CHECK(check_stability(s, result.flow, a.mu0).ok());

  // golden-rule residual
  const Vector v = reconstruct_eigenvector(s, result.flow, a.alpha);
  const Vector lhs = multiply(result.flow.b_tilde, v);
  for (std::size_t i = 0; i < 3; ++i) CHECK(lhs[i] == doctest::Approx(a.kappa * v[i]).epsilon(1e-8));
}

TEST_CASE("pipeline on the rounded chain") {
  const auto s = fixtures::three_peer();
  const auto flow = rounded_flow();
  const auto alpha = golden_alphas(flow, rounded_eigen(), s);
  const auto mu0 = nash_mu0(s, flow, alpha);
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(alpha[i] - fixtures::rounded::kAlpha[i]) < 0.05);
  CHECK(std::abs(mu0[0] - fixtures::rounded::kMu0[0]) < 0.005);
  CHECK(std::abs(mu0[1] - fixtures::rounded::kMu0[1]) < 0.005);
  // The rounded third entry (2.32) is not what the Nash formula gives for the
  // rounded inputs; the acceptance suite reports the mismatch.
  CHECK(mu0[2] == doctest::Approx(2.5276).epsilon(1e-4));
}

TEST_CASE("pipeline on the symmetric network matches closed form") {
  const auto result = golden_rule_pipeline(fixtures::symmetric2());
  const double alpha = 4.0 + 8.0 * kSqrt2 / 3.0;
  const double mu0 = (kSqrt2 - 1.0) / kSqrt2 * 2.0 + 4.0 / 3.0;
  CHECK(result.eigen.kappa == doctest::Approx(2.0 / 3));
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(result.allocation.alpha[i] == doctest::Approx(alpha).epsilon(1e-10));
    CHECK(result.allocation.mu0[i] == doctest::Approx(mu0).epsilon(1e-10));
    CHECK(result.stats.foreign_delay[i] == doctest::Approx(result.eigen.v[i]).epsilon(1e-10));
  }
}

TEST_CASE("pipeline errors carry their stage") {
  SUBCASE("single peer") {
    NetworkSpec s;
    s.n = 1;
    s.routing = Matrix(1, 1);
    s.lambda0 = {1.0};
    s.mu = {3.0};
    try {
      golden_rule_pipeline(s);
      FAIL("expected error");
    } catch (const Error& e) {
      CHECK(e.stage() == "validate");
    }
  }
  SUBCASE("infeasible capacity fails by default") {
    NetworkSpec s = fixtures::three_peer();
    s.mu = {7.6, 7.0, 9.0};
    try {
      golden_rule_pipeline(s);
      FAIL("expected error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kInfeasible);
      CHECK(e.stage() == "feasibility");
    }
    PipelineOptions opts;
    opts.feasibility = FeasibilityMode::kThinDemand;
    const auto thinned = golden_rule_pipeline(s, opts);
    CHECK(thinned.spec.lambda0[0] < 1.0);
    CHECK(check_stability(thinned.spec, thinned.flow, thinned.allocation.mu0).ok());
  }
  SUBCASE("invalid spec") {
    NetworkSpec s = fixtures::three_peer();
    s.routing(2, 0) = 0.0;
    s.routing(2, 1) = 0.0;
    try {
      golden_rule_pipeline(s);
      FAIL("expected error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kInvalidSpec);
      CHECK(std::string(e.what()).find("NOT_IRREDUCIBLE") != std::string::npos);
    }
  }
}

TEST_CASE("first-order condition holds at the Nash split") {
  const auto s = fixtures::three_peer();
  const auto result = golden_rule_pipeline(s);
  const auto& alpha = result.allocation.alpha;
  const double star = result.allocation.mu0[0];
  const auto at_star = disutility_derivative_check(s, result.flow, alpha, 0, star, 1e-5);
  CHECK(std::abs(at_star.first) < 1e-6);
  CHECK(at_star.second > 0.0);
  const auto right = disutility_derivative_check(s, result.flow, alpha, 0, star + 0.5, 1e-5);
  CHECK(right.first > 0.0);
  const auto left = disutility_derivative_check(s, result.flow, alpha, 0, star - 0.2, 1e-5);
  CHECK(left.first < 0.0);
  CHECK(code_of([&] {
          disutility_derivative_check(s, result.flow, alpha, 0, result.flow.b(0, 0) * s.lambda0[0], 1e-5);
        }) == ErrorCode::kUnstable);
}

TEST_CASE("Nash fixed point on random feasible specs") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<std::size_t> size(2, 8);
  for (int trial = 0; trial < 60; ++trial) {
    const auto s = fixtures::random_feasible_spec(rng, size(rng));
    const auto result = golden_rule_pipeline(s);
    for (std::size_t i = 0; i < s.n; ++i) {
      const auto d = disutility_derivative_check(s, result.flow, result.allocation.alpha, i,
                                                 result.allocation.mu0[i], 1e-6);
      CHECK(std::abs(d.first) < 1e-5);
      CHECK(d.second > 0.0);
    }
  }
}

TEST_CASE("golden-rule proportionality and reconstruction") {
  std::mt19937_64 rng(29);
  std::uniform_int_distribution<std::size_t> size(2, 10);
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = fixtures::random_feasible_spec(rng, size(rng));
    const auto result = golden_rule_pipeline(s);
    const Vector ratios = golden_rule_ratios(s, result.flow, result.allocation.alpha);
    const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
    CHECK((*hi - *lo) / result.eigen.kappa < 1e-7);
    CHECK(*lo == doctest::Approx(result.eigen.kappa).epsilon(1e-7));
    const Vector v = reconstruct_eigenvector(s, result.flow, result.allocation.alpha);
    CHECK(max_abs_diff(v, result.eigen.v) < 1e-10);
  }
}

TEST_CASE("extreme altruism drives one queue towards saturation") {
  const auto s = fixtures::three_peer();
  const auto flow = solve_flow_balance(s);
  const auto base = golden_rule_pipeline(s).allocation.alpha;
  const auto delays = [&](double alpha_1) {
    Vector alpha = base;
    alpha[0] = alpha_1;
    const auto mu0 = nash_mu0(s, flow, alpha);
    return queue_stats(s, flow, mu0, alpha);
  };
  SUBCASE("selfish limit") {
    double previous = 0.0;
    for (double a : {1e-2, 1e-4, 1e-6}) {
      const double d = delays(a).foreign_delay[0];
      CHECK(d > previous);
      previous = d;
    }
    CHECK(previous > 100.0);
  }
  SUBCASE("selfless limit") {
    double previous = 0.0;
    for (double a : {1e2, 1e4, 1e6}) {
      const double d = delays(a).local_delay[0];
      CHECK(d > previous);
      previous = d;
    }
    CHECK(previous > 100.0);
  }
}
