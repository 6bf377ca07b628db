//------------------------------------------------------------------------------
//
//   Copyright 2026 The Tempora Authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//------------------------------------------------------------------------------

#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tempora {

/// Raised when operand shapes do not conform.
class ShapeError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a NaN or Inf would enter or leave a public operation.
class NonFiniteError : public std::domain_error
{
public:
  using std::domain_error::domain_error;
};

/**
 * Dense row-major matrix of doubles.
 *
 * Batches are always laid out along rows: a batch of n instances with f
 * features is an n x f matrix. Bias vectors are 1 x n matrices.
 */
class Matrix
{
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double &operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> data() noexcept { return data_; }
  std::span<double const> data() const noexcept { return data_; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<double const> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  void fill(double v);
  bool same_shape(Matrix const &other) const noexcept
  {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  bool all_finite() const noexcept;

  /// "RxC" for error messages.
  std::string shape_string() const;

  Matrix &operator+=(Matrix const &other);
  Matrix &operator-=(Matrix const &other);
  Matrix &operator*=(double s);

  friend bool operator==(Matrix const &, Matrix const &) = default;

private:
  std::size_t         rows_{0};
  std::size_t         cols_{0};
  std::vector<double> data_;
};

Matrix operator+(Matrix a, Matrix const &b);
Matrix operator-(Matrix a, Matrix const &b);
Matrix operator*(Matrix a, double s);

enum class Activation
{
  Step,
  Sigmoid,
  Tanh,
  ReLU,
  Softmax,
  Linear
};

std::string_view activation_name(Activation a);
Activation       parse_activation(std::string_view name);

// Scalar forms. Softmax has no scalar form and is rejected.
double sigmoid(double z) noexcept;
double activate(Activation a, double z);
/// Derivative with respect to the pre-activation z, given z and y = activate(a, z).
double activation_derivative(Activation a, double z, double y);

/// Standard product a * b.
Matrix matmul(Matrix const &a, Matrix const &b);
/// a^T * b without materialising the transpose.
Matrix matmul_tn(Matrix const &a, Matrix const &b);
/// a * b^T without materialising the transpose.
Matrix matmul_nt(Matrix const &a, Matrix const &b);

// Accumulating variants used in backward passes: out += ...
void add_matmul(Matrix &out, Matrix const &a, Matrix const &b);
void add_matmul_tn(Matrix &out, Matrix const &a, Matrix const &b);
void add_matmul_nt(Matrix &out, Matrix const &a, Matrix const &b);

Matrix transpose(Matrix const &m);
Matrix hadamard(Matrix a, Matrix const &b);
/// Adds the 1 x cols row vector to every row.
Matrix add_row_broadcast(Matrix m, Matrix const &row);
/// 1 x cols vector of column sums.
Matrix column_sums(Matrix const &m);
void   add_column_sums(Matrix &out_row, Matrix const &m);
/// Rows [first, first + count) as a new matrix.
Matrix slice_rows(Matrix const &m, std::size_t first, std::size_t count);
double sum_squares(Matrix const &m) noexcept;

/// Elementwise activation; Softmax is applied per row.
Matrix apply_activation(Matrix const &m, Activation a);

/**
 * Backpropagates through an activation: given pre-activations z, outputs
 * y = apply_activation(z, a) and upstream dL/dy, returns dL/dz. Softmax uses
 * the per-row Jacobian.
 */
Matrix activation_backward(Matrix const &z, Matrix const &y, Matrix const &dy, Activation a);

/// phi(x w + b) with b broadcast over rows.
Matrix dense_forward(Matrix const &x, Matrix const &w, Matrix const &b, Activation a);

void require_finite(Matrix const &m, std::string_view what);

}  // namespace tempora
