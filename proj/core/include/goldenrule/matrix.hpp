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
#include <initializer_list>
#include <span>
#include <vector>

namespace goldenrule {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles. Networks in this library are tens to
/// low hundreds of peers, so nothing here is sparse.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix from_rows(const std::vector<Vector>& rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool square() const noexcept { return rows_ == cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }
  Vector column(std::size_t j) const;
  Vector diagonal() const;

  std::span<const double> data() const noexcept { return data_; }

  Matrix transposed() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);

/// y = A x
Vector multiply(const Matrix& a, std::span<const double> x);
/// y = xᵀ A
Vector multiply_left(std::span<const double> x, const Matrix& a);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> x);
double max_abs(std::span<const double> x);
double max_abs(const Matrix& a);
double max_abs_diff(std::span<const double> a, std::span<const double> b);
double max_abs_diff(const Matrix& a, const Matrix& b);

/// LU factorization with partial pivoting of a square matrix.
///
/// A pivot whose magnitude falls below `relative_pivot_tol * max|A|` marks the
/// system singular; `factor` then reports false and the object must not be
/// used for solves.
class LuDecomposition {
 public:
  bool factor(const Matrix& a, double relative_pivot_tol);
  Vector solve(std::span<const double> rhs) const;
  Matrix inverse() const;
  /// Solves Aᵀ x = rhs with the same factors.
  Vector solve_transposed(std::span<const double> rhs) const;

  std::size_t singular_column() const noexcept { return singular_column_; }

 private:
  Matrix lu_;
  std::vector<std::size_t> perm_;
  std::size_t singular_column_ = 0;
};

}  // namespace goldenrule
