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

#include "goldenrule/matrix.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <utility>

#include "goldenrule/error.hpp"

namespace goldenrule {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) {
      throw Error(ErrorCode::kDimensionMismatch, "ragged matrix literal");
    }
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(const std::vector<Vector>& rows) {
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  Matrix m(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) {
      throw Error(ErrorCode::kDimensionMismatch, "ragged matrix rows");
    }
    std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
  }
  return m;
}

Vector Matrix::column(std::size_t j) const {
  Vector out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
  return out;
}

Vector Matrix::diagonal() const {
  const std::size_t n = std::min(rows_, cols_);
  Vector out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = (*this)(i, i);
  return out;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw Error(ErrorCode::kDimensionMismatch, "matrix product shapes");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

namespace {

template <typename Op>
Matrix elementwise(const Matrix& a, const Matrix& b, Op op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "elementwise shapes");
  }
  Matrix c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) = op(a(i, j), b(i, j));
  return c;
}

}  // namespace

Matrix operator+(const Matrix& a, const Matrix& b) { return elementwise(a, b, std::plus<>{}); }
Matrix operator-(const Matrix& a, const Matrix& b) { return elementwise(a, b, std::minus<>{}); }

Matrix operator*(double s, const Matrix& a) {
  Matrix c = a;
  for (std::size_t i = 0; i < c.rows(); ++i)
    for (double& x : c.row(i)) x *= s;
  return c;
}

Vector multiply(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) throw Error(ErrorCode::kDimensionMismatch, "matrix-vector shapes");
  Vector y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) y[i] = dot(a.row(i), x);
  return y;
}

Vector multiply_left(std::span<const double> x, const Matrix& a) {
  if (a.rows() != x.size()) throw Error(ErrorCode::kDimensionMismatch, "vector-matrix shapes");
  Vector y(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    const auto r = a.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j) y[j] += xi * r[j];
  }
  return y;
}

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> x) {
  // Scaled to avoid overflow for large components.
  const double scale = max_abs(x);
  if (scale == 0.0 || !std::isfinite(scale)) return scale;
  double s = 0.0;
  for (double v : x) {
    const double t = v / scale;
    s += t * t;
  }
  return scale * std::sqrt(s);
}

double max_abs(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

double max_abs(const Matrix& a) { return max_abs(a.data()); }

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "matrix difference shapes");
  }
  return max_abs_diff(a.data(), b.data());
}

bool LuDecomposition::factor(const Matrix& a, double relative_pivot_tol) {
  if (!a.square()) throw Error(ErrorCode::kDimensionMismatch, "LU of non-square matrix");
  const std::size_t n = a.rows();
  lu_ = a;
  perm_.resize(n);
  std::iota(perm_.begin(), perm_.end(), std::size_t{0});
  const double threshold = relative_pivot_tol * max_abs(a);

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pivot = k;
    double best = std::abs(lu_(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(lu_(i, k)) > best) {
        best = std::abs(lu_(i, k));
        pivot = i;
      }
    }
    if (!(best > threshold)) {
      singular_column_ = k;
      return false;
    }
    if (pivot != k) {
      std::swap_ranges(lu_.row(k).begin(), lu_.row(k).end(), lu_.row(pivot).begin());
      std::swap(perm_[k], perm_[pivot]);
    }
    const double diag = lu_(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double factor = lu_(i, k) / diag;
      lu_(i, k) = factor;
      if (factor == 0.0) continue;
      for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= factor * lu_(k, j);
    }
  }
  return true;
}

Vector LuDecomposition::solve(std::span<const double> rhs) const {
  const std::size_t n = lu_.rows();
  if (rhs.size() != n) throw Error(ErrorCode::kDimensionMismatch, "LU solve rhs size");
  Vector x(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = rhs[perm_[i]];
    for (std::size_t j = 0; j < i; ++j) s -= lu_(i, j) * x[j];
    x[i] = s;
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = x[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= lu_(i, j) * x[j];
    x[i] = s / lu_(i, i);
  }
  return x;
}

Vector LuDecomposition::solve_transposed(std::span<const double> rhs) const {
  // PA = LU  =>  Aᵀ = Uᵀ Lᵀ P, so solve Uᵀ y = rhs, Lᵀ z = y, x = Pᵀ z.
  const std::size_t n = lu_.rows();
  if (rhs.size() != n) throw Error(ErrorCode::kDimensionMismatch, "LU solve rhs size");
  Vector y(rhs.begin(), rhs.end());
  for (std::size_t i = 0; i < n; ++i) {
    double s = y[i];
    for (std::size_t j = 0; j < i; ++j) s -= lu_(j, i) * y[j];
    y[i] = s / lu_(i, i);
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = y[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= lu_(j, i) * y[j];
    y[i] = s;
  }
  Vector x(n);
  for (std::size_t i = 0; i < n; ++i) x[perm_[i]] = y[i];
  return x;
}

Matrix LuDecomposition::inverse() const {
  const std::size_t n = lu_.rows();
  Matrix inv(n, n);
  Vector e(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    const Vector col = solve(e);
    for (std::size_t i = 0; i < n; ++i) inv(i, j) = col[i];
    e[j] = 0.0;
  }
  return inv;
}

}  // namespace goldenrule
