// SPDX-License-Identifier: Apache-2.0

#include "tempose/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace tempose {

bool adam_step(Mat& param, const Mat& grad, AdamState& state) {
  if (grad.rows() != param.rows() || grad.cols() != param.cols())
    throw std::invalid_argument("adam_step: gradient shape does not match parameter");
  if (!grad.allFinite()) return false;

  if (state.m.size() == 0) {
    state.m = Mat::Zero(param.rows(), param.cols());
    state.v = Mat::Zero(param.rows(), param.cols());
  }
  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad;
  state.v = state.beta2 * state.v + (1.0 - state.beta2) * grad.cwiseProduct(grad);
  const double bc1 = 1.0 - std::pow(state.beta1, t);
  const double bc2 = 1.0 - std::pow(state.beta2, t);
  Mat m_hat = state.m / bc1;
  Mat v_hat = state.v / bc2;
  param.array() -=
      state.learning_rate * m_hat.array() / (v_hat.array().sqrt() + state.epsilon);
  return true;
}

AdamOptimizer::AdamOptimizer(std::vector<Var> params, double learning_rate)
    : params_(std::move(params)), lr_(learning_rate) {
  states_.resize(params_.size());
  for (auto& s : states_) s.learning_rate = lr_;
}

int AdamOptimizer::step() {
  int skipped = 0;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Var& p = params_[i];
    if (p.grad().size() == 0) p.zero_grad();
    if (!adam_step(p.mutable_value(), p.grad(), states_[i])) ++skipped;
  }
  skipped_total_ += skipped;
  return skipped;
}

void AdamOptimizer::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

void AdamOptimizer::set_learning_rate(double lr) {
  lr_ = lr;
  for (auto& s : states_) s.learning_rate = lr;
}

}  // namespace tempose
