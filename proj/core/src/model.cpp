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

#include "goldenrule/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "goldenrule/error.hpp"

namespace goldenrule {

std::string_view to_string(ViolationCode code) noexcept {
  switch (code) {
    case ViolationCode::kNegativeEntry: return "NEGATIVE_ENTRY";
    case ViolationCode::kRowSumExceedsOne: return "ROW_SUM_EXCEEDS_ONE";
    case ViolationCode::kNotStrictlySubstochastic: return "NOT_STRICTLY_SUBSTOCHASTIC";
    case ViolationCode::kNotIrreducible: return "NOT_IRREDUCIBLE";
    case ViolationCode::kZeroDemand: return "ZERO_DEMAND";
    case ViolationCode::kNonpositiveCapacity: return "NONPOSITIVE_CAPACITY";
    case ViolationCode::kLocalUnstable: return "LOCAL_UNSTABLE";
    case ViolationCode::kForeignUnstable: return "FOREIGN_UNSTABLE";
  }
  return "UNKNOWN";
}

bool ValidationReport::has(ViolationCode code) const noexcept {
  return std::any_of(violations.begin(), violations.end(),
                     [code](const Violation& v) { return v.code == code; });
}

void check_dimensions(const NetworkSpec& spec) {
  if (spec.n == 0) throw Error(ErrorCode::kDimensionMismatch, "peer count must be positive");
  if (spec.routing.rows() != spec.n || spec.routing.cols() != spec.n) {
    std::ostringstream os;
    os << "routing is " << spec.routing.rows() << "x" << spec.routing.cols() << ", expected "
       << spec.n << "x" << spec.n;
    throw Error(ErrorCode::kDimensionMismatch, os.str());
  }
  if (spec.lambda0.size() != spec.n) {
    throw Error(ErrorCode::kDimensionMismatch, "lambda0 length differs from peer count");
  }
  if (spec.mu.size() != spec.n) {
    throw Error(ErrorCode::kDimensionMismatch, "mu length differs from peer count");
  }
}

namespace {

// Forward reachability from `start` over the support of `m` (or its transpose).
std::vector<bool> reachable(const Matrix& m, std::size_t start, bool reversed) {
  const std::size_t n = m.rows();
  std::vector<bool> seen(n, false);
  std::vector<std::size_t> stack{start};
  seen[start] = true;
  while (!stack.empty()) {
    const std::size_t u = stack.back();
    stack.pop_back();
    for (std::size_t w = 0; w < n; ++w) {
      const double entry = reversed ? m(w, u) : m(u, w);
      if (entry > 0.0 && !seen[w]) {
        seen[w] = true;
        stack.push_back(w);
      }
    }
  }
  return seen;
}

}  // namespace

bool check_irreducible(const Matrix& routing) {
  if (!routing.square()) throw Error(ErrorCode::kDimensionMismatch, "routing must be square");
  const std::size_t n = routing.rows();
  if (n == 0) return false;
  const auto all = [](const std::vector<bool>& s) {
    return std::all_of(s.begin(), s.end(), [](bool b) { return b; });
  };
  return all(reachable(routing, 0, false)) && all(reachable(routing, 0, true));
}

Vector resolution_probabilities(const Matrix& routing) {
  Vector r0(routing.rows());
  for (std::size_t i = 0; i < routing.rows(); ++i) {
    double sum = 0.0;
    for (double x : routing.row(i)) sum += x;
    r0[i] = std::clamp(1.0 - sum, 0.0, 1.0);
  }
  return r0;
}

ValidationReport validate_spec(const NetworkSpec& spec) {
  check_dimensions(spec);
  ValidationReport report;
  const std::size_t n = spec.n;
  auto add = [&](ViolationCode code, std::optional<std::size_t> row,
                 std::optional<std::size_t> col, std::string msg) {
    report.violations.push_back({code, row, col, std::move(msg)});
  };

  bool entries_ok = true;
  bool any_row_below_one = false;
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double r = spec.routing(i, j);
      if (!std::isfinite(r) || r < 0.0) {
        entries_ok = false;
        std::ostringstream os;
        os << "r[" << i + 1 << "][" << j + 1 << "] = " << r << " is not a finite non-negative number";
        add(ViolationCode::kNegativeEntry, i, j, os.str());
        continue;
      }
      sum += r;
    }
    if (sum > 1.0 + kRowSumTolerance) {
      std::ostringstream os;
      os.precision(17);
      os << "row " << i + 1 << " sums to " << sum;
      add(ViolationCode::kRowSumExceedsOne, i, std::nullopt, os.str());
    } else if (sum < 1.0 - kRowSumTolerance) {
      any_row_below_one = true;
    }
    if (spec.routing(i, i) > 0.0) {
      std::ostringstream os;
      os << "peer " << i + 1 << " forwards to itself with probability " << spec.routing(i, i);
      report.notes.push_back(os.str());
    }
  }

  if (!any_row_below_one) {
    add(ViolationCode::kNotStrictlySubstochastic, std::nullopt, std::nullopt,
        "no peer resolves queries with positive probability; I - R is singular");
  }

  if (entries_ok && !check_irreducible(spec.routing)) {
    add(ViolationCode::kNotIrreducible, std::nullopt, std::nullopt,
        "forwarding graph is not strongly connected");
  }

  bool any_demand = false;
  for (std::size_t i = 0; i < n; ++i) {
    const double l = spec.lambda0[i];
    if (!std::isfinite(l) || l < 0.0) {
      std::ostringstream os;
      os << "lambda0[" << i + 1 << "] = " << l << " is not a finite non-negative rate";
      add(ViolationCode::kNegativeEntry, i, std::nullopt, os.str());
    } else if (l > 0.0) {
      any_demand = true;
    }
  }
  if (!any_demand) {
    add(ViolationCode::kZeroDemand, std::nullopt, std::nullopt,
        "no peer has positive exogenous demand");
  }

  for (std::size_t i = 0; i < n; ++i) {
    const double m = spec.mu[i];
    if (!std::isfinite(m) || m <= 0.0) {
      std::ostringstream os;
      os << "mu[" << i + 1 << "] = " << m << " must be positive";
      add(ViolationCode::kNonpositiveCapacity, i, std::nullopt, os.str());
    }
  }
  return report;
}

}  // namespace goldenrule
