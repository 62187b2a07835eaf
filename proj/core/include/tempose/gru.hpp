// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "tempose/tensor.hpp"

#include <random>
#include <span>
#include <vector>

namespace tempose {

// Gated recurrent unit cell. Gate convention, pinned by the step oracle test:
//   r  = sigmoid(Wr x + Ur h + br)
//   z  = sigmoid(Wz x + Uz h + bz)
//   n  = tanh(Wn x + r .* (Un h) + bn)
//   h' = (1 - z) .* n + z .* h
// Inputs may be batched column-wise: x is in_dim x B, h is hidden_dim x B.
struct GruCell {
  int in_dim = 0;
  int hidden_dim = 0;
  Var w_reset, u_reset, b_reset;
  Var w_update, u_update, b_update;
  Var w_cand, u_cand, b_cand;

  static GruCell create(int in_dim, int hidden_dim, std::mt19937_64& rng);

  Var step(const Var& x, const Var& h) const;

  // Rollout from a zero hidden state over xs in the given order; returns the
  // final hidden state (hidden_dim x batch). Empty xs yields the zero state.
  Var rollout(std::span<const Var> xs, Eigen::Index batch) const;

  void collect_params(std::vector<Var>& out) const;
};

// Weight initialization shared by all layers: uniform in +-1/sqrt(fan_in).
Var init_weight(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng);
Var init_bias(Eigen::Index rows);

}  // namespace tempose
