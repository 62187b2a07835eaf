// SPDX-License-Identifier: Apache-2.0

#include "tempose/regressor.hpp"

#include "tempose/gru.hpp"

#include <stdexcept>
#include <string>

namespace tempose {

void RegressorConfig::validate() const {
  if (feature_dim <= 0 || joints <= 0 || shape_dim < 0)
    throw std::invalid_argument("RegressorConfig: bad dimensions");
  if (n_iter < 0) throw std::invalid_argument("RegressorConfig: n_iter < 0");
  for (int h : hidden)
    if (h <= 0)
      throw std::invalid_argument("RegressorConfig: hidden widths must be positive");
}

Regressor Regressor::create(const RegressorConfig& cfg, const Vec& mean_raw,
                            std::mt19937_64& rng) {
  cfg.validate();
  if (mean_raw.size() != cfg.raw_dim())
    throw std::invalid_argument("Regressor: mean vector size " +
                                std::to_string(mean_raw.size()) + " != " +
                                std::to_string(cfg.raw_dim()));
  Regressor r;
  r.cfg_ = cfg;
  if (r.cfg_.hidden.empty())
    r.cfg_.hidden = {2 * cfg.feature_dim, 2 * cfg.feature_dim};
  r.mean_raw_ = mean_raw;
  r.mean_var_ = Var::constant(mean_raw);

  int in = cfg.feature_dim + cfg.raw_dim();
  for (int width : r.cfg_.hidden) {
    r.w_.push_back(init_weight(width, in, rng));
    r.b_.push_back(init_bias(width));
    in = width;
  }
  r.w_.push_back(init_weight(cfg.raw_dim(), in, rng));
  r.b_.push_back(init_bias(cfg.raw_dim()));
  return r;
}

Var Regressor::regress(const Var& feature) const {
  if (feature.rows() != cfg_.feature_dim)
    throw std::invalid_argument("Regressor: feature dim mismatch");
  const Eigen::Index batch = feature.cols();
  Var est = tile_cols(mean_var_, batch);
  for (int it = 0; it < cfg_.n_iter; ++it) {
    std::vector<Var> parts{feature, est};
    Var h = concat_rows(parts);
    for (std::size_t l = 0; l + 1 < w_.size(); ++l)
      h = relu(add_colwise(w_[l] * h, b_[l]));
    Var delta = add_colwise(w_.back() * h, b_.back());
    est = est + delta;
  }
  return est;
}

void Regressor::collect_params(std::vector<Var>& out) const {
  for (const Var& w : w_) out.push_back(w);
  for (const Var& b : b_) out.push_back(b);
}

DecodedParams decode_column(const Var& raw, Eigen::Index col, int joints,
                            int shape_dim) {
  if (raw.rows() != body::raw6d_dim(joints, shape_dim))
    throw std::invalid_argument("decode_column: raw dim mismatch");
  Var column = raw.cols() == 1 ? raw : slice_cols(raw, col, 1);
  DecodedParams d;
  d.rot.reserve(joints);
  for (int j = 0; j < joints; ++j)
    d.rot.push_back(rot::rot6d_to_matrix(block(column, 6 * j, 0, 6, 1)));
  d.beta = block(column, 6 * joints, 0, shape_dim, 1);
  d.cam_s = block(column, 6 * joints + shape_dim, 0, 1, 1);
  d.cam_t = block(column, 6 * joints + shape_dim + 1, 0, 2, 1);
  return d;
}

body::BodyParams decode_raw(const Vec& raw, int joints, int shape_dim) {
  if (raw.size() != body::raw6d_dim(joints, shape_dim))
    throw std::invalid_argument("decode_raw: size mismatch");
  if (!raw.allFinite())
    throw std::runtime_error("decode_raw: non-finite parameters");
  body::BodyParams p;
  p.theta.resize(3, joints);
  for (int j = 0; j < joints; ++j) {
    const rot::Rot6d r6 = raw.segment<6>(6 * j);
    p.theta.col(j) = rot::matrix_to_axis_angle(rot::rot6d_to_matrix(r6));
  }
  p.beta = raw.segment(6 * joints, shape_dim);
  p.cam_s = raw(6 * joints + shape_dim);
  p.cam_t = raw.segment<2>(6 * joints + shape_dim + 1);
  return p;
}

Vec encode_raw(const body::BodyParams& p) {
  const int joints = static_cast<int>(p.theta.cols());
  const int shape_dim = static_cast<int>(p.beta.size());
  Vec raw(body::raw6d_dim(joints, shape_dim));
  for (int j = 0; j < joints; ++j) {
    rot::Mat3 R = rot::axis_angle_to_matrix(p.theta.col(j));
    raw.segment<3>(6 * j) = R.col(0);
    raw.segment<3>(6 * j + 3) = R.col(1);
  }
  raw.segment(6 * joints, shape_dim) = p.beta;
  raw(6 * joints + shape_dim) = p.cam_s;
  raw.segment<2>(6 * joints + shape_dim + 1) = p.cam_t;
  return raw;
}

}  // namespace tempose
