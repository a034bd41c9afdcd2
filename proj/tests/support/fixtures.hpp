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

#include <random>
#include <vector>

#include "goldenrule/allocation.hpp"
#include "goldenrule/flowbalance.hpp"
#include "goldenrule/model.hpp"
#include "goldenrule/spectral.hpp"
#include "oracles.hpp"

namespace fixtures {

using goldenrule::Matrix;
using goldenrule::NetworkSpec;
using goldenrule::Vector;

/// The three-peer example network: R = (1/6)[[0,2,3],[2,0,3],[3,1,0]].
inline NetworkSpec three_peer() {
  NetworkSpec s;
  s.n = 3;
  s.routing = Matrix{{0.0, 2.0 / 6, 3.0 / 6}, {2.0 / 6, 0.0, 3.0 / 6}, {3.0 / 6, 1.0 / 6, 0.0}};
  s.lambda0 = {1.0, 2.0, 1.0};
  s.mu = {8.0, 7.0, 9.0};
  return s;
}

/// Two peers forwarding to each other with probability 1/2.
inline NetworkSpec symmetric2() {
  NetworkSpec s;
  s.n = 2;
  s.routing = Matrix{{0.0, 0.5}, {0.5, 0.0}};
  s.lambda0 = {1.0, 1.0};
  s.mu = {4.0, 4.0};
  return s;
}

/// Reference values for the three-peer example, rounded to three decimals.
namespace rounded {
inline const Matrix kB{{2.062, 0.937, 1.500}, {1.312, 1.687, 1.500}, {1.250, 0.750, 2.000}};
inline const Vector kLambda{5.9, 5.061, 6.5};
inline constexpr double kKappa = 2.366;
inline const Vector kV{0.576, 0.641, 0.507};
inline const Vector kThreshold{7.636, 6.621, 8.472};
inline const Vector kAlpha{46.9, 28.6, 28.0};
inline const Vector kMu0{2.43, 3.75, 2.32};
inline const Vector kMuForeign{5.57, 3.25, 6.68};
}  // namespace rounded

/// Full-precision chain values, recomputed at 40 digits (exact rational B,
/// root of the characteristic cubic, null-space eigenvector).
namespace full_precision {
inline constexpr double kKappa = 2.3659124530009832;
inline const Vector kV{0.57575386924405467, 0.64111285908814128, 0.50742662914191752};
inline const Vector kAlpha{58.671450832703403, 28.777477504268597, 27.728481138557301};
inline const Vector kMu0{2.3881467135201955, 3.7527122250015292, 2.5292717359137273};
inline const Vector kThreshold{7.6743532864798045, 6.6222877749984708, 8.4707282640862727};
}  // namespace full_precision

inline Matrix to_matrix(const std::vector<std::vector<double>>& rows) { return Matrix::from_rows(rows); }

inline std::vector<std::vector<double>> to_rows(const Matrix& m) {
  std::vector<std::vector<double>> rows(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) rows[i].assign(m.row(i).begin(), m.row(i).end());
  return rows;
}

/// Random irreducible, strictly sub-stochastic spec with positive demand.
inline NetworkSpec random_spec(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  NetworkSpec s;
  s.n = n;
  s.routing = to_matrix(oracle::random_irreducible_routing(rng, n));
  s.lambda0.resize(n);
  for (double& l : s.lambda0) l = 0.1 + 2.0 * unit(rng);
  s.mu.assign(n, 1.0);
  return s;
}

/// Random spec whose capacities clear the golden-rule threshold by a random
/// margin in [5%, 100%].
inline NetworkSpec random_feasible_spec(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  NetworkSpec s = random_spec(rng, n);
  const auto flow = goldenrule::solve_flow_balance(s);
  const auto eig = goldenrule::perron_eigenpair(flow.b_tilde);
  const Vector threshold = goldenrule::feasibility_threshold(flow, eig);
  for (std::size_t i = 0; i < n; ++i) s.mu[i] = threshold[i] * (1.05 + 0.95 * unit(rng));
  return s;
}

}  // namespace fixtures
