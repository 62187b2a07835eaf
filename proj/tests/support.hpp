// SPDX-License-Identifier: Apache-2.0
//
// Shared fixtures: a small chain-skeleton body model and random body
// parameters, used wherever a test needs a body without the bundled asset.

#pragma once

#include "tempose/body_model.hpp"

#include <random>
#include <string>
#include <vector>

namespace test_support {

inline tempose::body::BodyModel chain_model(std::mt19937_64& rng, int joints = 4,
                                            int shape_dim = 2, int vertices = 3) {
  using namespace tempose;
  std::uniform_real_distribution<double> dist(-0.2, 0.2);
  std::vector<body::Joint> js;
  for (int j = 0; j < joints; ++j) {
    body::Joint joint;
    joint.name = "j" + std::to_string(j);
    joint.parent = j - 1;
    joint.rest_offset =
        rot::Vec3(dist(rng), 0.25 + std::abs(dist(rng)), dist(rng));
    joint.shape_basis = Mat::Zero(3, shape_dim);
    for (int b = 0; b < shape_dim; ++b)
      joint.shape_basis.col(b) = rot::Vec3(dist(rng), dist(rng), dist(rng)) * 0.1;
    js.push_back(std::move(joint));
  }
  std::vector<body::Vertex> vs;
  std::uniform_int_distribution<int> pick(0, joints - 1);
  for (int v = 0; v < vertices; ++v)
    vs.push_back({pick(rng), rot::Vec3(dist(rng), dist(rng), dist(rng))});
  // every non-root joint is scored; similarity alignment needs >= 3 of them
  std::vector<int> eval;
  for (int j = 1; j < joints; ++j) eval.push_back(j);
  if (eval.size() < 2) eval.insert(eval.begin(), 0);
  return body::BodyModel(std::move(js), std::move(vs), std::move(eval));
}

inline tempose::body::BodyParams random_params(std::mt19937_64& rng, int joints,
                                               int shape_dim,
                                               double pose_range = 0.8) {
  using namespace tempose;
  std::uniform_real_distribution<double> dist(-pose_range, pose_range);
  body::BodyParams p;
  p.theta.resize(3, joints);
  for (int j = 0; j < joints; ++j)
    p.theta.col(j) = rot::Vec3(dist(rng), dist(rng), dist(rng));
  p.beta.resize(shape_dim);
  for (int b = 0; b < shape_dim; ++b) p.beta(b) = dist(rng);
  p.cam_s = 1.0 + 0.2 * dist(rng);
  p.cam_t = Eigen::Vector2d(dist(rng), dist(rng));
  return p;
}

inline std::string asset_path(const char* name) {
#ifdef TEMPOSE_SOURCE_DIR
  return std::string(TEMPOSE_SOURCE_DIR) + "/" + name;
#else
  return name;
#endif
}

}  // namespace test_support
