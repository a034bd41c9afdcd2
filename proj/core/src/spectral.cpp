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

#include "goldenrule/spectral.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "goldenrule/error.hpp"

namespace goldenrule {

Vector normalize(std::span<const double> v) {
  const double norm = norm2(v);
  if (norm == 0.0) throw Error(ErrorCode::kZeroVector, "cannot normalize the zero vector");
  if (!std::isfinite(norm)) throw Error(ErrorCode::kNonFiniteState, "vector has non-finite entries");
  std::size_t lead = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (std::abs(v[i]) > std::abs(v[lead])) lead = i;
  }
  const double scale = (v[lead] < 0.0 ? -1.0 : 1.0) / norm;
  Vector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] * scale;
  return out;
}

EigenPair perron_eigenpair(const Matrix& b_tilde, const PowerIterationOptions& options) {
  if (!b_tilde.square()) throw Error(ErrorCode::kDimensionMismatch, "B~ must be square");
  const std::size_t n = b_tilde.rows();
  if (n < 2) throw Error(ErrorCode::kInvalidArgument, "Perron pair needs at least two peers");
  for (double x : b_tilde.data()) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      throw Error(ErrorCode::kInvalidArgument, "B~ must be finite and non-negative");
    }
  }
  if (max_abs(b_tilde) == 0.0) throw Error(ErrorCode::kDegenerate, "B~ is the zero matrix");

  Vector x = normalize(Vector(n, 1.0));
  double best_residual = std::numeric_limits<double>::infinity();
  double previous_norm = 0.0;
  std::size_t stalled = 0;
  bool averaging = false;
  EigenPair result;

  for (std::size_t it = 1; it <= options.max_iters; ++it) {
    const Vector y = multiply(b_tilde, x);
    // Rayleigh quotient with ‖x‖ = 1 minimizes ‖y - κx‖ over κ.
    const double kappa = dot(x, y);
    Vector r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = y[i] - kappa * x[i];
    const double residual = norm2(r);

    result.kappa = kappa;
    result.v = x;
    result.iterations = it;
    result.residual = residual;
    if (residual <= options.tol) return result;

    // An oscillating residual never sets a new best.
    if (residual < best_residual) {
      best_residual = residual;
      stalled = 0;
    } else {
      ++stalled;
    }
    if (stalled >= options.oscillation_window) averaging = true;

    const double norm = norm2(y);
    if (norm == 0.0) throw Error(ErrorCode::kDegenerate, "iterate collapsed to zero");
    if (averaging) {
      // Mean of the unit iterate and its successor; damps every eigenvalue
      // of modulus κ except κ itself.
      const double shift = previous_norm > 0.0 ? previous_norm : norm;
      Vector z(n);
      for (std::size_t i = 0; i < n; ++i) z[i] = y[i] + shift * x[i];
      x = normalize(z);
    } else {
      x = normalize(y);
    }
    previous_norm = norm;
  }

  std::ostringstream os;
  os << "residual " << result.residual << " above tolerance " << options.tol << " after "
     << options.max_iters << " iterations";
  throw Error(ErrorCode::kNoConvergence, os.str());
}

}  // namespace goldenrule
