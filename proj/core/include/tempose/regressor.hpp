// SPDX-License-Identifier: Apache-2.0
//
// Iterative body-parameter regressor. One shared head maps any temporal
// feature to the full parameter vector by refining a mean estimate a fixed
// number of times. Rotations are produced in the 6D representation and
// converted downstream.

#pragma once

#include "tempose/body_model.hpp"
#include "tempose/tensor.hpp"

#include <random>
#include <vector>

namespace tempose {

// Raw parameter layout, one column per window:
//   [ 6D rotation per joint (6J) | shape (B) | cam scale | cam t (2) ]
struct RegressorConfig {
  int feature_dim = 96;
  int joints = 24;
  int shape_dim = 10;
  int n_iter = 3;
  std::vector<int> hidden;  // empty selects {2*feature_dim, 2*feature_dim}

  int raw_dim() const { return body::raw6d_dim(joints, shape_dim); }
  void validate() const;
};

// Rotation-matrix view of one raw parameter column, still on the graph.
struct DecodedParams {
  std::vector<Var> rot;  // J rotation matrices, 3x3
  Var beta;              // B x 1
  Var cam_s;             // 1 x 1
  Var cam_t;             // 2 x 1
};

class Regressor {
 public:
  Regressor() = default;
  static Regressor create(const RegressorConfig& cfg, const Vec& mean_raw,
                          std::mt19937_64& rng);

  // feature is feature_dim x batch; returns raw_dim x batch. Every window
  // starts from the mean estimate and receives n_iter additive refinements.
  Var regress(const Var& feature) const;

  const RegressorConfig& config() const { return cfg_; }
  const Vec& mean_raw() const { return mean_raw_; }
  void collect_params(std::vector<Var>& out) const;

 private:
  RegressorConfig cfg_;
  Vec mean_raw_;
  Var mean_var_;                    // raw_dim x 1 constant
  std::vector<Var> w_, b_;          // hidden layers then output layer
};

// Graph-side decode of column `col` of a raw batch.
DecodedParams decode_column(const Var& raw, Eigen::Index col, int joints,
                            int shape_dim);

// Numeric decode (6D -> axis-angle). Throws std::runtime_error on non-finite
// input so callers can flag the window.
body::BodyParams decode_raw(const Vec& raw, int joints, int shape_dim);

// Numeric encode used by data generation and Theta-bar estimation.
Vec encode_raw(const body::BodyParams& p);

}  // namespace tempose
