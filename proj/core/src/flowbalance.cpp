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

#include "goldenrule/flowbalance.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "goldenrule/error.hpp"

namespace goldenrule {

Vector FlowSolution::local_load(std::span<const double> lambda0) const {
  Vector out(lambda0.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = b(i, i) * lambda0[i];
  return out;
}

Vector FlowSolution::foreign_load(std::span<const double> lambda0) const {
  Vector out(lambda0.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = lambda_total[i] - b(i, i) * lambda0[i];
  return out;
}

FlowSolution solve_flow_balance(const NetworkSpec& spec) {
  check_dimensions(spec);
  const std::size_t n = spec.n;
  const Matrix a = Matrix::identity(n) - spec.routing;

  LuDecomposition lu;
  if (!lu.factor(a, kSingularPivotTolerance)) {
    std::ostringstream os;
    os << "I - R has a vanishing pivot at column " << lu.singular_column() + 1
       << " (a recurrent class never resolves queries)";
    throw Error(ErrorCode::kSingularSystem, os.str());
  }

  FlowSolution flow;
  flow.b = lu.inverse();
  // Λ solves (I - R)ᵀ Λ = λ₀ directly rather than via Bᵀλ₀.
  flow.lambda_total = lu.solve_transposed(spec.lambda0);
  flow.b_tilde = flow.b;
  for (std::size_t i = 0; i < n; ++i) flow.b_tilde(i, i) = 0.0;
  flow.r0 = resolution_probabilities(spec.routing);

  // Tiny negative round-off in B would break the non-negativity contract.
  for (std::size_t i = 0; i < n; ++i) {
    for (double& x : flow.b.row(i)) x = std::max(x, 0.0);
    for (double& x : flow.b_tilde.row(i)) x = std::max(x, 0.0);
  }

  const Vector back = multiply_left(flow.lambda_total, a);
  const double scale = std::max(max_abs(spec.lambda0), max_abs(flow.lambda_total));
  if (scale > 0.0 && max_abs_diff(back, spec.lambda0) > kFlowResidualTolerance * scale) {
    throw Error(ErrorCode::kSingularSystem, "flow-balance residual exceeds tolerance; I - R ill-conditioned");
  }
  return flow;
}

Matrix neumann_b(const Matrix& routing, std::size_t terms) {
  if (!routing.square()) throw Error(ErrorCode::kDimensionMismatch, "routing must be square");
  const std::size_t n = routing.rows();
  // Horner form: S_k = I + S_{k-1} R, the same recursion the distributed
  // iteration runs row by row.
  Matrix sum = Matrix::identity(n);
  for (std::size_t k = 0; k < terms; ++k) {
    Matrix next = sum * routing;
    for (std::size_t i = 0; i < n; ++i) next(i, i) += 1.0;
    sum = std::move(next);
  }
  return sum;
}

ValidationReport check_stability(const NetworkSpec& spec, const FlowSolution& flow,
                                 std::span<const double> mu0) {
  check_dimensions(spec);
  if (mu0.size() != spec.n) throw Error(ErrorCode::kDimensionMismatch, "mu0 length");
  ValidationReport report;
  for (std::size_t i = 0; i < spec.n; ++i) {
    const double local = flow.b(i, i) * spec.lambda0[i];
    const double foreign = flow.lambda_total[i] - local;
    if (!(mu0[i] > local)) {
      std::ostringstream os;
      os.precision(17);
      os << "peer " << i + 1 << ": mu0 = " << mu0[i] << " does not exceed local load " << local;
      report.violations.push_back({ViolationCode::kLocalUnstable, i, std::nullopt, os.str()});
    }
    if (!(spec.mu[i] - mu0[i] > foreign)) {
      std::ostringstream os;
      os.precision(17);
      os << "peer " << i + 1 << ": mu - mu0 = " << spec.mu[i] - mu0[i]
         << " does not exceed foreign load " << foreign;
      report.violations.push_back({ViolationCode::kForeignUnstable, i, std::nullopt, os.str()});
    }
  }
  return report;
}

}  // namespace goldenrule
