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

#include "tempora/numerics.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tempora {

namespace {

using RowMajor    = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMut      = Eigen::Map<RowMajor>;
using MapConst    = Eigen::Map<RowMajor const>;

MapConst view(Matrix const &m)
{
  return {m.data().data(), static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols())};
}

MapMut view(Matrix &m)
{
  return {m.data().data(), static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols())};
}

[[noreturn]] void shape_mismatch(std::string_view op, Matrix const &a, Matrix const &b)
{
  std::ostringstream os;
  os << op << ": shape mismatch " << a.shape_string() << " vs " << b.shape_string();
  throw ShapeError(os.str());
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
  : rows_{rows}
  , cols_{cols}
  , data_(rows * cols, fill)
{
  if (!std::isfinite(fill))
  {
    throw NonFiniteError("Matrix: non-finite fill value");
  }
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
  : rows_{rows}
  , cols_{cols}
  , data_(std::move(data))
{
  if (data_.size() != rows * cols)
  {
    throw ShapeError("Matrix: data length " + std::to_string(data_.size()) +
                     " does not match " + shape_string());
  }
  require_finite(*this, "Matrix");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
{
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (auto const &r : rows)
  {
    if (r.size() != cols_)
    {
      throw ShapeError("Matrix: ragged initializer");
    }
    data_.insert(data_.end(), r.begin(), r.end());
  }
  require_finite(*this, "Matrix");
}

Matrix Matrix::identity(std::size_t n)
{
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
  {
    m(i, i) = 1.0;
  }
  return m;
}

void Matrix::fill(double v)
{
  std::fill(data_.begin(), data_.end(), v);
}

bool Matrix::all_finite() const noexcept
{
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

std::string Matrix::shape_string() const
{
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

Matrix &Matrix::operator+=(Matrix const &other)
{
  if (!same_shape(other))
  {
    shape_mismatch("add", *this, other);
  }
  for (std::size_t i = 0; i < data_.size(); ++i)
  {
    data_[i] += other.data_[i];
  }
  return *this;
}

Matrix &Matrix::operator-=(Matrix const &other)
{
  if (!same_shape(other))
  {
    shape_mismatch("subtract", *this, other);
  }
  for (std::size_t i = 0; i < data_.size(); ++i)
  {
    data_[i] -= other.data_[i];
  }
  return *this;
}

Matrix &Matrix::operator*=(double s)
{
  for (auto &v : data_)
  {
    v *= s;
  }
  return *this;
}

Matrix operator+(Matrix a, Matrix const &b)
{
  a += b;
  return a;
}

Matrix operator-(Matrix a, Matrix const &b)
{
  a -= b;
  return a;
}

Matrix operator*(Matrix a, double s)
{
  a *= s;
  return a;
}

std::string_view activation_name(Activation a)
{
  switch (a)
  {
  case Activation::Step:
    return "step";
  case Activation::Sigmoid:
    return "sigmoid";
  case Activation::Tanh:
    return "tanh";
  case Activation::ReLU:
    return "relu";
  case Activation::Softmax:
    return "softmax";
  case Activation::Linear:
    return "linear";
  }
  return "unknown";
}

Activation parse_activation(std::string_view name)
{
  for (auto a : {Activation::Step, Activation::Sigmoid, Activation::Tanh, Activation::ReLU,
                 Activation::Softmax, Activation::Linear})
  {
    if (activation_name(a) == name)
    {
      return a;
    }
  }
  throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

double sigmoid(double z) noexcept
{
  // branch on sign so exp() never overflows
  if (z >= 0.0)
  {
    return 1.0 / (1.0 + std::exp(-z));
  }
  double const e = std::exp(z);
  return e / (1.0 + e);
}

double activate(Activation a, double z)
{
  switch (a)
  {
  case Activation::Step:
    return z >= 0.0 ? 1.0 : 0.0;
  case Activation::Sigmoid:
    return sigmoid(z);
  case Activation::Tanh:
    return std::tanh(z);
  case Activation::ReLU:
    return z > 0.0 ? z : 0.0;
  case Activation::Linear:
    return z;
  case Activation::Softmax:
    break;
  }
  throw std::invalid_argument("activate: softmax has no scalar form");
}

double activation_derivative(Activation a, double z, double y)
{
  switch (a)
  {
  case Activation::Step:
    return 0.0;
  case Activation::Sigmoid:
    return y * (1.0 - y);
  case Activation::Tanh:
    return 1.0 - y * y;
  case Activation::ReLU:
    return z > 0.0 ? 1.0 : 0.0;
  case Activation::Linear:
    return 1.0;
  case Activation::Softmax:
    break;
  }
  throw std::invalid_argument("activation_derivative: softmax has no scalar form");
}

Matrix matmul(Matrix const &a, Matrix const &b)
{
  if (a.cols() != b.rows())
  {
    shape_mismatch("matmul", a, b);
  }
  Matrix out(a.rows(), b.cols());
  view(out).noalias() = view(a) * view(b);
  require_finite(out, "matmul");
  return out;
}

Matrix matmul_tn(Matrix const &a, Matrix const &b)
{
  if (a.rows() != b.rows())
  {
    shape_mismatch("matmul_tn", a, b);
  }
  Matrix out(a.cols(), b.cols());
  view(out).noalias() = view(a).transpose() * view(b);
  require_finite(out, "matmul_tn");
  return out;
}

Matrix matmul_nt(Matrix const &a, Matrix const &b)
{
  if (a.cols() != b.cols())
  {
    shape_mismatch("matmul_nt", a, b);
  }
  Matrix out(a.rows(), b.rows());
  view(out).noalias() = view(a) * view(b).transpose();
  require_finite(out, "matmul_nt");
  return out;
}

void add_matmul(Matrix &out, Matrix const &a, Matrix const &b)
{
  if (a.cols() != b.rows() || out.rows() != a.rows() || out.cols() != b.cols())
  {
    shape_mismatch("add_matmul", a, b);
  }
  view(out).noalias() += view(a) * view(b);
}

void add_matmul_tn(Matrix &out, Matrix const &a, Matrix const &b)
{
  if (a.rows() != b.rows() || out.rows() != a.cols() || out.cols() != b.cols())
  {
    shape_mismatch("add_matmul_tn", a, b);
  }
  view(out).noalias() += view(a).transpose() * view(b);
}

void add_matmul_nt(Matrix &out, Matrix const &a, Matrix const &b)
{
  if (a.cols() != b.cols() || out.rows() != a.rows() || out.cols() != b.rows())
  {
    shape_mismatch("add_matmul_nt", a, b);
  }
  view(out).noalias() += view(a) * view(b).transpose();
}

Matrix transpose(Matrix const &m)
{
  Matrix out(m.cols(), m.rows());
  view(out) = view(m).transpose();
  return out;
}

Matrix hadamard(Matrix a, Matrix const &b)
{
  if (!a.same_shape(b))
  {
    shape_mismatch("hadamard", a, b);
  }
  auto       lhs = a.data();
  auto const rhs = b.data();
  for (std::size_t i = 0; i < lhs.size(); ++i)
  {
    lhs[i] *= rhs[i];
  }
  return a;
}

Matrix add_row_broadcast(Matrix m, Matrix const &row)
{
  if (row.rows() != 1 || row.cols() != m.cols())
  {
    shape_mismatch("add_row_broadcast", m, row);
  }
  auto const r = row.data();
  for (std::size_t i = 0; i < m.rows(); ++i)
  {
    auto dst = m.row(i);
    for (std::size_t j = 0; j < dst.size(); ++j)
    {
      dst[j] += r[j];
    }
  }
  return m;
}

Matrix column_sums(Matrix const &m)
{
  Matrix out(1, m.cols());
  add_column_sums(out, m);
  return out;
}

void add_column_sums(Matrix &out_row, Matrix const &m)
{
  if (out_row.rows() != 1 || out_row.cols() != m.cols())
  {
    shape_mismatch("add_column_sums", out_row, m);
  }
  auto dst = out_row.data();
  for (std::size_t i = 0; i < m.rows(); ++i)
  {
    auto const src = m.row(i);
    for (std::size_t j = 0; j < src.size(); ++j)
    {
      dst[j] += src[j];
    }
  }
}

Matrix slice_rows(Matrix const &m, std::size_t first, std::size_t count)
{
  if (first + count > m.rows())
  {
    throw ShapeError("slice_rows: rows [" + std::to_string(first) + ", " +
                     std::to_string(first + count) + ") out of range for " + m.shape_string());
  }
  auto const src = m.data().subspan(first * m.cols(), count * m.cols());
  return Matrix(count, m.cols(), std::vector<double>(src.begin(), src.end()));
}

double sum_squares(Matrix const &m) noexcept
{
  double acc = 0.0;
  for (double v : m.data())
  {
    acc += v * v;
  }
  return acc;
}

Matrix apply_activation(Matrix const &m, Activation a)
{
  Matrix out = m;
  if (a == Activation::Softmax)
  {
    for (std::size_t i = 0; i < out.rows(); ++i)
    {
      auto         r   = out.row(i);
      double const top = *std::max_element(r.begin(), r.end());
      double       sum = 0.0;
      for (auto &v : r)
      {
        v = std::exp(v - top);
        sum += v;
      }
      for (auto &v : r)
      {
        v /= sum;
      }
    }
    return out;
  }
  if (a == Activation::Linear)
  {
    return out;
  }
  for (auto &v : out.data())
  {
    v = activate(a, v);
  }
  return out;
}

Matrix activation_backward(Matrix const &z, Matrix const &y, Matrix const &dy, Activation a)
{
  if (!z.same_shape(y) || !z.same_shape(dy))
  {
    shape_mismatch("activation_backward", z, dy);
  }
  Matrix dz(z.rows(), z.cols());
  if (a == Activation::Softmax)
  {
    for (std::size_t i = 0; i < z.rows(); ++i)
    {
      auto const yr  = y.row(i);
      auto const dyr = dy.row(i);
      double     dot = 0.0;
      for (std::size_t j = 0; j < yr.size(); ++j)
      {
        dot += yr[j] * dyr[j];
      }
      auto out = dz.row(i);
      for (std::size_t j = 0; j < yr.size(); ++j)
      {
        out[j] = yr[j] * (dyr[j] - dot);
      }
    }
    return dz;
  }
  auto const zs  = z.data();
  auto const ys  = y.data();
  auto const dys = dy.data();
  auto       out = dz.data();
  for (std::size_t i = 0; i < out.size(); ++i)
  {
    out[i] = dys[i] * activation_derivative(a, zs[i], ys[i]);
  }
  return dz;
}

Matrix dense_forward(Matrix const &x, Matrix const &w, Matrix const &b, Activation a)
{
  auto z = add_row_broadcast(matmul(x, w), b);
  auto y = apply_activation(z, a);
  require_finite(y, "dense_forward");
  return y;
}

void require_finite(Matrix const &m, std::string_view what)
{
  if (!m.all_finite())
  {
    throw NonFiniteError(std::string(what) + ": non-finite value in " + m.shape_string() +
                         " matrix");
  }
}

}  // namespace tempora
