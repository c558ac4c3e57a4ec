// Copyright 2026 The bncap Authors
// SPDX-License-Identifier: Apache-2.0

#include "bncap/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bncap/error.hpp"

namespace bncap {

namespace {

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_same_length(std::span<const double> a, std::span<const double> b, const char* op) {
  if (a.size() != b.size()) {
    throw DimensionError(std::string(op) + ": length " + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()));
  }
}

}  // namespace

const char* to_string(FormatErrc code) {
  switch (code) {
    case FormatErrc::bad_magic: return "bad magic";
    case FormatErrc::bad_dimension: return "bad dimension";
    case FormatErrc::truncated: return "truncated file";
    case FormatErrc::trailing_data: return "trailing data";
    case FormatErrc::non_finite: return "non-finite value";
    case FormatErrc::duplicate_id: return "duplicate id";
    case FormatErrc::malformed_line: return "malformed line";
    case FormatErrc::unknown_tensor: return "unknown tensor";
    case FormatErrc::missing_tensor: return "missing tensor";
    case FormatErrc::shape_mismatch: return "shape mismatch";
    case FormatErrc::version_mismatch: return "version mismatch";
    case FormatErrc::bad_header: return "bad header";
    case FormatErrc::io: return "i/o error";
  }
  return "format error";
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw DimensionError("matrix " + std::to_string(rows) + "x" + std::to_string(cols) +
                         " given " + std::to_string(data_.size()) + " elements");
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Vector matvec(const Matrix& m, std::span<const double> v) {
  if (m.cols() != v.size()) {
    throw DimensionError("matvec: matrix " + shape(m) + " times vector of length " +
                         std::to_string(v.size()));
  }
  Vector out(m.rows(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) out[i] = dot(m.row(i), v);
  return out;
}

Vector matvec_transposed(const Matrix& m, std::span<const double> v) {
  Vector out(m.cols(), 0.0);
  add_matvec_transposed(m, v, out);
  return out;
}

void add_matvec_transposed(const Matrix& m, std::span<const double> v, std::span<double> out) {
  if (m.rows() != v.size() || m.cols() != out.size()) {
    throw DimensionError("matvec_transposed: matrix " + shape(m) + " transposed times vector of length " +
                         std::to_string(v.size()) + " into " + std::to_string(out.size()));
  }
  for (std::size_t i = 0; i < m.rows(); ++i) {
    if (v[i] != 0.0) axpy(v[i], m.row(i), out);
  }
}

void add_outer(Matrix& m, std::span<const double> a, std::span<const double> b, double scale) {
  if (m.rows() != a.size() || m.cols() != b.size()) {
    throw DimensionError("add_outer: matrix " + shape(m) + " vs outer " + std::to_string(a.size()) +
                         "x" + std::to_string(b.size()));
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != 0.0) axpy(scale * a[i], b, m.row(i));
  }
}

double sigmoid_scalar(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Vector sigmoid(std::span<const double> v) {
  Vector out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), sigmoid_scalar);
  return out;
}

Vector tanh_vec(std::span<const double> v) {
  Vector out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [](double x) { return std::tanh(x); });
  return out;
}

Vector hadamard(std::span<const double> a, std::span<const double> b) {
  require_same_length(a, b, "hadamard");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

Vector add(std::span<const double> a, std::span<const double> b) {
  require_same_length(a, b, "add");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  require_same_length(x, y, "axpy");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

Vector softmax(std::span<const double> v) {
  if (v.empty()) throw InvalidArgument("softmax of an empty vector");
  const double peak = *std::max_element(v.begin(), v.end());
  Vector out(v.size());
  double total = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::exp(v[i] - peak);
    total += out[i];
  }
  for (double& x : out) x /= total;
  return out;
}

Vector log_softmax(std::span<const double> v) {
  if (v.empty()) throw InvalidArgument("log_softmax of an empty vector");
  const double peak = *std::max_element(v.begin(), v.end());
  double total = 0.0;
  for (double x : v) total += std::exp(x - peak);
  const double log_norm = peak + std::log(total);
  Vector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] - log_norm;
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  require_same_length(a, b, "dot");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double squared_norm(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return acc;
}

std::size_t argmax(std::span<const double> v) {
  if (v.empty()) throw InvalidArgument("argmax of an empty vector");
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace bncap
