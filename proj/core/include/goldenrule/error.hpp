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

#include <stdexcept>
#include <string>
#include <string_view>

namespace goldenrule {

enum class ErrorCode {
  kDimensionMismatch,
  kInvalidArgument,
  kSingularSystem,
  kNoConvergence,
  kDegenerate,
  kZeroVector,
  kUnstable,
  kInfeasibleCapacity,
  kInfeasible,
  kThinningImpossible,
  kNonFiniteState,
  kUnstableConfig,
  kInvalidSpec,
};

/// Upper-snake name used in reports, e.g. "SINGULAR_SYSTEM".
std::string_view to_string(ErrorCode code) noexcept;

/// Domain error raised by every module. `stage()` is filled in by the
/// pipeline when an error crosses a stage boundary.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string stage = {});

  ErrorCode code() const noexcept { return code_; }
  const std::string& stage() const noexcept { return stage_; }
  const std::string& detail() const noexcept { return detail_; }

  Error with_stage(std::string stage) const;

 private:
  ErrorCode code_;
  std::string stage_;
  std::string detail_;
};

}  // namespace goldenrule
