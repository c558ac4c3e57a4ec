// Copyright 2026 The bncap Authors
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "bncap/error.hpp"
#include "bncap/numerics.hpp"

using namespace bncap;

TEST_CASE("sigmoid and tanh reference values") {
  // 30-digit references, rounded.
  CHECK(sigmoid_scalar(1.0) == doctest::Approx(0.7310585786300049).epsilon(1e-15));
  CHECK(sigmoid_scalar(-1.0) == doctest::Approx(0.2689414213699951).epsilon(1e-15));
  CHECK(sigmoid_scalar(0.0) == 0.5);
  const Vector t = tanh_vec(Vector{1.0});
  CHECK(t[0] == doctest::Approx(0.7615941559557649).epsilon(1e-15));
}

TEST_CASE("sigmoid saturates without overflow") {
  const Vector s = sigmoid(Vector{-1000.0, 1000.0, -40.0});
  CHECK(s[0] >= 0.0);
  CHECK(s[1] == 1.0);
  CHECK(std::isfinite(s[2]));
  CHECK(s[2] > 0.0);
}

TEST_CASE("softmax of [0, ln 3] is [1/4, 3/4]") {
  const Vector p = softmax(Vector{0.0, std::log(3.0)});
  CHECK(p[0] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(p[1] == doctest::Approx(0.75).epsilon(1e-15));
  const Vector lp = log_softmax(Vector{0.0, std::log(3.0)});
  CHECK(lp[0] == doctest::Approx(std::log(0.25)).epsilon(1e-14));
}

TEST_CASE("softmax is shift invariant and stable for large logits") {
  const Vector a = softmax(Vector{1.0, 2.0, 3.0});
  const Vector b = softmax(Vector{1001.0, 1002.0, 1003.0});
  for (std::size_t i = 0; i < 3; ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
  CHECK_THROWS_AS(softmax(Vector{}), InvalidArgument);
}

TEST_CASE("softmax rows are simplex points") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n(0.0, 5.0);
  for (int trial = 0; trial < 100; ++trial) {
    Vector v(1 + trial % 9);
    for (double& x : v) x = n(rng);
    const Vector p = softmax(v);
    double sum = 0.0;
    for (double x : p) {
      CHECK(x >= 0.0);
      sum += x;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(argmax(p) == argmax(v));
  }
}

TEST_CASE("matrix-vector products") {
  const Matrix m(2, 3, {1, 2, 3, 4, 5, 6});
  CHECK(matvec(m, Vector{1, 0, -1}) == Vector{-2, -2});
  CHECK(matvec_transposed(m, Vector{1, 1}) == Vector{5, 7, 9});
  Vector acc{1, 1, 1};
  add_matvec_transposed(m, Vector{0, 1}, acc);
  CHECK(acc == Vector{5, 6, 7});
  CHECK_THROWS_AS(matvec(m, Vector{1, 2}), DimensionError);
  CHECK(matvec(Matrix::identity(3), Vector{4, 5, 6}) == Vector{4, 5, 6});
}

TEST_CASE("outer product accumulation") {
  Matrix m(2, 2);
  add_outer(m, Vector{1, 2}, Vector{3, 4}, 0.5);
  CHECK(m == Matrix(2, 2, {1.5, 2, 3, 4}));
}

TEST_CASE("elementwise helpers") {
  CHECK(hadamard(Vector{1, 2}, Vector{3, 4}) == Vector{3, 8});
  CHECK(add(Vector{1, 2}, Vector{3, 4}) == Vector{4, 6});
  Vector y{1, 1};
  axpy(2.0, Vector{1, -1}, y);
  CHECK(y == Vector{3, -1});
  CHECK(dot(Vector{1, 2}, Vector{3, 4}) == 11.0);
  CHECK(squared_norm(Vector{3, 4}) == 25.0);
  CHECK_THROWS_AS(hadamard(Vector{1}, Vector{1, 2}), DimensionError);
}

TEST_CASE("argmax breaks ties toward the first index") {
  CHECK(argmax(Vector{0.2, 0.5, 0.5}) == 1);
  CHECK(argmax(Vector{1.0, 1.0}) == 0);
}
