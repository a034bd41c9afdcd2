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

#include "goldenrule/matrix.hpp"

namespace goldenrule {

/// Perron root κ and unit-L2, strictly positive right eigenvector of B̃.
struct EigenPair {
  double kappa = 0.0;
  Vector v;
  std::size_t iterations = 0;
  double residual = 0.0;  ///< ‖B̃v - κv‖₂
};

struct PowerIterationOptions {
  double tol = 1e-10;
  std::size_t max_iters = 100'000;
  /// Consecutive non-decreasing residuals before switching to averaged
  /// iterates (handles period-2 support graphs).
  std::size_t oscillation_window = 100;
};

/// Power iteration from the all-ones vector. Throws kDegenerate for the zero
/// matrix, kNoConvergence when the residual stays above `tol`.
EigenPair perron_eigenpair(const Matrix& b_tilde, const PowerIterationOptions& options = {});

/// v / ‖v‖₂, oriented so the entry of largest magnitude is positive.
/// Throws kZeroVector.
Vector normalize(std::span<const double> v);

}  // namespace goldenrule
