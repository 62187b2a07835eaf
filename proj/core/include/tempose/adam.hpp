// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "tempose/tensor.hpp"

#include <vector>

namespace tempose {

// Per-parameter Adam state with the usual bias-corrected update.
struct AdamState {
  Mat m;  // first moment
  Mat v;  // second moment
  long step_count = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double learning_rate = 1e-3;
};

// Applies one Adam step in place. Returns false (and leaves param, moments
// and step_count untouched) when the gradient contains non-finite entries.
bool adam_step(Mat& param, const Mat& grad, AdamState& state);

// Drives a list of parameter Vars. Gradients live on the Var nodes.
class AdamOptimizer {
 public:
  AdamOptimizer(std::vector<Var> params, double learning_rate);

  // Returns the number of parameters whose update was skipped because of a
  // non-finite gradient.
  int step();
  void zero_grad();
  void set_learning_rate(double lr);
  double learning_rate() const { return lr_; }
  long skipped_updates() const { return skipped_total_; }

  const std::vector<Var>& params() const { return params_; }
  std::vector<AdamState>& states() { return states_; }

 private:
  std::vector<Var> params_;
  std::vector<AdamState> states_;
  double lr_;
  long skipped_total_ = 0;
};

}  // namespace tempose
