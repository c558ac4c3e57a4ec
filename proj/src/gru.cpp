// Copyright 2026 The bncap Authors
// SPDX-License-Identifier: Apache-2.0

#include "bncap/gru.hpp"

#include <string>

#include "bncap/error.hpp"

namespace bncap {

const char* to_string(Direction d) {
  return d == Direction::forward ? "forward" : "backward";
}

GruParams::GruParams(std::size_t input_dim, std::size_t hidden_dim)
    : input_dim(input_dim),
      hidden_dim(hidden_dim),
      w_z(hidden_dim, input_dim),
      u_z(hidden_dim, hidden_dim),
      w_r(hidden_dim, input_dim),
      u_r(hidden_dim, hidden_dim),
      w(hidden_dim, input_dim),
      u(hidden_dim, hidden_dim) {}

GruGrads::GruGrads(const GruParams& p)
    : d_w_z(p.hidden_dim, p.input_dim),
      d_u_z(p.hidden_dim, p.hidden_dim),
      d_w_r(p.hidden_dim, p.input_dim),
      d_u_r(p.hidden_dim, p.hidden_dim),
      d_w(p.hidden_dim, p.input_dim),
      d_u(p.hidden_dim, p.hidden_dim),
      d_x_t(p.input_dim, 0.0),
      d_h_prev(p.hidden_dim, 0.0) {}

GruStepCache gru_cell_forward(const GruParams& p, std::span<const double> x_t,
                              std::span<const double> h_prev) {
  if (x_t.size() != p.input_dim || h_prev.size() != p.hidden_dim) {
    throw DimensionError("gru_cell_forward: expected input " + std::to_string(p.input_dim) +
                         " and hidden " + std::to_string(p.hidden_dim) + ", got " +
                         std::to_string(x_t.size()) + " and " + std::to_string(h_prev.size()));
  }
  GruStepCache c;
  c.x_t.assign(x_t.begin(), x_t.end());
  c.h_prev.assign(h_prev.begin(), h_prev.end());
  c.z_t = sigmoid(add(matvec(p.w_z, x_t), matvec(p.u_z, h_prev)));
  c.r_t = sigmoid(add(matvec(p.w_r, x_t), matvec(p.u_r, h_prev)));
  c.h_tilde = tanh_vec(add(matvec(p.w, x_t), matvec(p.u, hadamard(c.r_t, h_prev))));
  c.h_t.resize(p.hidden_dim);
  for (std::size_t i = 0; i < p.hidden_dim; ++i) {
    c.h_t[i] = c.z_t[i] * h_prev[i] + (1.0 - c.z_t[i]) * c.h_tilde[i];
  }
  return c;
}

namespace {

struct WeightGradRefs {
  Matrix& w_z;
  Matrix& u_z;
  Matrix& w_r;
  Matrix& u_r;
  Matrix& w;
  Matrix& u;
};

void backward_step(const GruParams& p, const GruStepCache& cache, std::span<const double> d_h_t,
                   const WeightGradRefs& g, Vector& d_x_t, Vector& d_h_prev) {
  const std::size_t h = p.hidden_dim;
  if (d_h_t.size() != h || cache.h_t.size() != h || cache.x_t.size() != p.input_dim) {
    throw DimensionError("gru_cell_backward: gradient of length " + std::to_string(d_h_t.size()) +
                         " for hidden size " + std::to_string(h));
  }

  Vector d_pre_z(h), d_pre_r(h), d_pre_c(h), rh(h);
  d_h_prev.assign(h, 0.0);
  d_x_t.assign(p.input_dim, 0.0);

  for (std::size_t i = 0; i < h; ++i) {
    const double z = cache.z_t[i];
    const double c = cache.h_tilde[i];
    const double dz = d_h_t[i] * (cache.h_prev[i] - c);
    const double dc = d_h_t[i] * (1.0 - z);
    d_h_prev[i] = d_h_t[i] * z;
    d_pre_z[i] = dz * z * (1.0 - z);
    d_pre_c[i] = dc * (1.0 - c * c);
    rh[i] = cache.r_t[i] * cache.h_prev[i];
  }

  // candidate
  add_outer(g.w, d_pre_c, cache.x_t);
  add_outer(g.u, d_pre_c, rh);
  add_matvec_transposed(p.w, d_pre_c, d_x_t);
  const Vector d_rh = matvec_transposed(p.u, d_pre_c);
  for (std::size_t i = 0; i < h; ++i) {
    const double r = cache.r_t[i];
    d_pre_r[i] = d_rh[i] * cache.h_prev[i] * r * (1.0 - r);
    d_h_prev[i] += d_rh[i] * r;
  }

  // reset gate
  add_outer(g.w_r, d_pre_r, cache.x_t);
  add_outer(g.u_r, d_pre_r, cache.h_prev);
  add_matvec_transposed(p.w_r, d_pre_r, d_x_t);
  add_matvec_transposed(p.u_r, d_pre_r, d_h_prev);

  // update gate
  add_outer(g.w_z, d_pre_z, cache.x_t);
  add_outer(g.u_z, d_pre_z, cache.h_prev);
  add_matvec_transposed(p.w_z, d_pre_z, d_x_t);
  add_matvec_transposed(p.u_z, d_pre_z, d_h_prev);
}

}  // namespace

void accumulate_gru_cell_backward(const GruParams& p, const GruStepCache& cache,
                                  std::span<const double> d_h_t, GruGrads& g) {
  backward_step(p, cache, d_h_t, {g.d_w_z, g.d_u_z, g.d_w_r, g.d_u_r, g.d_w, g.d_u}, g.d_x_t,
                g.d_h_prev);
}

void accumulate_gru_cell_backward(const GruParams& p, const GruStepCache& cache,
                                  std::span<const double> d_h_t, GruParams& weight_grads,
                                  Vector& d_x_t, Vector& d_h_prev) {
  GruParams& g = weight_grads;
  backward_step(p, cache, d_h_t, {g.w_z, g.u_z, g.w_r, g.u_r, g.w, g.u}, d_x_t, d_h_prev);
}

GruGrads gru_cell_backward(const GruParams& p, const GruStepCache& cache,
                           std::span<const double> d_h_t) {
  GruGrads g(p);
  accumulate_gru_cell_backward(p, cache, d_h_t, g);
  return g;
}

std::vector<GruStepCache> gru_run_sequence(const GruParams& p, std::span<const Vector> inputs,
                                           std::span<const double> h0, Direction direction) {
  std::vector<GruStepCache> caches;
  caches.reserve(inputs.size());
  Vector h(h0.begin(), h0.end());
  for (std::size_t step = 0; step < inputs.size(); ++step) {
    const std::size_t t = direction == Direction::forward ? step : inputs.size() - 1 - step;
    caches.push_back(gru_cell_forward(p, inputs[t], h));
    h = caches.back().h_t;
  }
  return caches;
}

}  // namespace bncap
