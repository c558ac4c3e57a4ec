// Copyright 2026 The bncap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bncap/numerics.hpp"

namespace bncap {

enum class Direction { forward, backward };

const char* to_string(Direction d);

/// Weights of a bias-free GRU cell.
///
///   z = sigmoid(w_z x + u_z h)
///   r = sigmoid(w_r x + u_r h)
///   c = tanh(w x + u (r * h))
///   h' = z * h + (1 - z) * c
struct GruParams {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  Matrix w_z, u_z;
  Matrix w_r, u_r;
  Matrix w, u;

  GruParams() = default;
  GruParams(std::size_t input_dim, std::size_t hidden_dim);

  friend bool operator==(const GruParams&, const GruParams&) = default;
};

/// Everything the backward pass needs from one forward step.
struct GruStepCache {
  Vector x_t;
  Vector h_prev;
  Vector z_t;
  Vector r_t;
  Vector h_tilde;
  Vector h_t;
};

/// Gradients shaped like GruParams, plus the input and previous-state gradients
/// of the most recent step that was folded in.
struct GruGrads {
  Matrix d_w_z, d_u_z;
  Matrix d_w_r, d_u_r;
  Matrix d_w, d_u;
  Vector d_x_t;
  Vector d_h_prev;

  GruGrads() = default;
  explicit GruGrads(const GruParams& p);
};

GruStepCache gru_cell_forward(const GruParams& p, std::span<const double> x_t,
                              std::span<const double> h_prev);

/// Adds this step's weight gradients into `grads` and overwrites its
/// d_x_t and d_h_prev.
void accumulate_gru_cell_backward(const GruParams& p, const GruStepCache& cache,
                                  std::span<const double> d_h_t, GruGrads& grads);

/// Variant that accumulates weight gradients into a GruParams-shaped buffer.
void accumulate_gru_cell_backward(const GruParams& p, const GruStepCache& cache,
                                  std::span<const double> d_h_t, GruParams& weight_grads,
                                  Vector& d_x_t, Vector& d_h_prev);

GruGrads gru_cell_backward(const GruParams& p, const GruStepCache& cache,
                           std::span<const double> d_h_t);

/// Unrolls the cell over `inputs`. Backward consumes the inputs last to first;
/// caches come back in consumption order.
std::vector<GruStepCache> gru_run_sequence(const GruParams& p, std::span<const Vector> inputs,
                                           std::span<const double> h0, Direction direction);

}  // namespace bncap
