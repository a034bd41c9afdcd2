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

#include "goldenrule/error.hpp"

#include <utility>

namespace goldenrule {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kDimensionMismatch: return "DIMENSION_MISMATCH";
    case ErrorCode::kInvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::kSingularSystem: return "SINGULAR_SYSTEM";
    case ErrorCode::kNoConvergence: return "NO_CONVERGENCE";
    case ErrorCode::kDegenerate: return "DEGENERATE";
    case ErrorCode::kZeroVector: return "ZERO_VECTOR";
    case ErrorCode::kUnstable: return "UNSTABLE";
    case ErrorCode::kInfeasibleCapacity: return "INFEASIBLE_CAPACITY";
    case ErrorCode::kInfeasible: return "INFEASIBLE";
    case ErrorCode::kThinningImpossible: return "THINNING_IMPOSSIBLE";
    case ErrorCode::kNonFiniteState: return "NON_FINITE_STATE";
    case ErrorCode::kUnstableConfig: return "UNSTABLE_CONFIG";
    case ErrorCode::kInvalidSpec: return "INVALID_SPEC";
  }
  return "UNKNOWN";
}

namespace {

std::string compose(ErrorCode code, const std::string& stage, const std::string& message) {
  std::string out;
  if (!stage.empty()) out += stage + ": ";
  out += std::string(to_string(code));
  if (!message.empty()) out += ": " + message;
  return out;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message, std::string stage)
    : std::runtime_error(compose(code, stage, message)),
      code_(code),
      stage_(std::move(stage)),
      detail_(message) {}

Error Error::with_stage(std::string stage) const { return Error(code_, detail_, std::move(stage)); }

}  // namespace goldenrule
