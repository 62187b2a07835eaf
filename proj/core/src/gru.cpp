// SPDX-License-Identifier: Apache-2.0

#include "tempose/gru.hpp"

#include <cmath>
#include <stdexcept>

namespace tempose {

Var init_weight(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(cols));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Mat w(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) w(i, j) = dist(rng);
  return Var::leaf(w, true);
}

Var init_bias(Eigen::Index rows) { return Var::leaf(Mat::Zero(rows, 1), true); }

GruCell GruCell::create(int in_dim, int hidden_dim, std::mt19937_64& rng) {
  if (in_dim <= 0 || hidden_dim <= 0)
    throw std::invalid_argument("GruCell: dimensions must be positive");
  GruCell c;
  c.in_dim = in_dim;
  c.hidden_dim = hidden_dim;
  c.w_reset = init_weight(hidden_dim, in_dim, rng);
  c.u_reset = init_weight(hidden_dim, hidden_dim, rng);
  c.b_reset = init_bias(hidden_dim);
  c.w_update = init_weight(hidden_dim, in_dim, rng);
  c.u_update = init_weight(hidden_dim, hidden_dim, rng);
  c.b_update = init_bias(hidden_dim);
  c.w_cand = init_weight(hidden_dim, in_dim, rng);
  c.u_cand = init_weight(hidden_dim, hidden_dim, rng);
  c.b_cand = init_bias(hidden_dim);
  return c;
}

Var GruCell::step(const Var& x, const Var& h) const {
  if (x.rows() != in_dim || h.rows() != hidden_dim || x.cols() != h.cols())
    throw std::invalid_argument("GruCell::step: shape mismatch");
  Var r = sigmoid(add_colwise(w_reset * x + u_reset * h, b_reset));
  Var z = sigmoid(add_colwise(w_update * x + u_update * h, b_update));
  Var n = tanh(add_colwise(w_cand * x + mul(r, u_cand * h), b_cand));
  Var ones = Var::constant(Mat::Ones(hidden_dim, x.cols()));
  return mul(ones - z, n) + mul(z, h);
}

Var GruCell::rollout(std::span<const Var> xs, Eigen::Index batch) const {
  Var h = Var::constant(Mat::Zero(hidden_dim, batch));
  for (const Var& x : xs) h = step(x, h);
  return h;
}

void GruCell::collect_params(std::vector<Var>& out) const {
  out.push_back(w_reset);
  out.push_back(u_reset);
  out.push_back(b_reset);
  out.push_back(w_update);
  out.push_back(u_update);
  out.push_back(b_update);
  out.push_back(w_cand);
  out.push_back(u_cand);
  out.push_back(b_cand);
}

}  // namespace tempose
