// Copyright 2026 The bncap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace bncap {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Products. All throw DimensionError naming both shapes on mismatch.
Vector matvec(const Matrix& m, std::span<const double> v);
Vector matvec_transposed(const Matrix& m, std::span<const double> v);
void add_matvec_transposed(const Matrix& m, std::span<const double> v, std::span<double> out);
/// m += scale * a b^T
void add_outer(Matrix& m, std::span<const double> a, std::span<const double> b, double scale = 1.0);

// Elementwise.
Vector sigmoid(std::span<const double> v);
Vector tanh_vec(std::span<const double> v);
Vector hadamard(std::span<const double> a, std::span<const double> b);
Vector add(std::span<const double> a, std::span<const double> b);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

/// Numerically stable softmax; throws InvalidArgument on empty input.
Vector softmax(std::span<const double> v);
/// log(softmax(v)) without forming exp of large values.
Vector log_softmax(std::span<const double> v);

double sigmoid_scalar(double x);
double dot(std::span<const double> a, std::span<const double> b);
double squared_norm(std::span<const double> v);
/// Index of the largest element; ties go to the lowest index.
std::size_t argmax(std::span<const double> v);

}  // namespace bncap
