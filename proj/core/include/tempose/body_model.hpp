// SPDX-License-Identifier: Apache-2.0
//
// Simplified parametric articulated body: kinematic tree with shape-dependent
// bone offsets, rigidly attached surface vertices, and weak-perspective
// projection. Lengths are meters.

#pragma once

#include "tempose/rotations.hpp"
#include "tempose/tensor.hpp"

#include <optional>
#include <string>
#include <vector>

namespace tempose::body {

struct Joint {
  std::string name;
  int parent = -1;             // -1 marks the root (joint 0)
  rot::Vec3 rest_offset;       // from parent, rest pose
  Mat shape_basis;             // 3 x B offset deltas per shape coefficient
};

struct Vertex {
  int joint = 0;
  rot::Vec3 offset;  // in the joint's local frame
};

// Body parameters for one frame: per-joint axis-angle pose (column j = joint
// j; column 0 is the global orientation), shape coefficients, and a
// weak-perspective camera.
struct BodyParams {
  Mat theta;           // 3 x J axis-angle
  Vec beta;            // B
  double cam_s = 1.0;
  Eigen::Vector2d cam_t = Eigen::Vector2d::Zero();

  // Flat layout [theta (3J, column-major) | beta | s | t], used by the file
  // formats and the smoothing filter.
  Vec flatten() const;
  static BodyParams unflatten(const Vec& v, int joints, int shape_dim);
};

inline int params_dim(int joints, int shape_dim) { return 3 * joints + shape_dim + 3; }
inline int raw6d_dim(int joints, int shape_dim) { return 6 * joints + shape_dim + 3; }

struct FkResult {
  Mat joints;    // 3 x J
  Mat vertices;  // 3 x V (V may be 0)
};

struct FkVars {
  std::vector<Var> rot_global;  // J nodes, 3x3
  Var joints;                   // 3 x J
  Var vertices;                 // 3 x V, invalid when not requested
};

class BodyModel {
 public:
  // Loads and validates the JSON schema {joints, vertices, eval_joints}.
  static BodyModel load(const std::string& path);
  static BodyModel from_json_text(const std::string& text);
  std::string to_json_text() const;
  void save(const std::string& path) const;

  int joint_count() const { return static_cast<int>(joints_.size()); }
  int vertex_count() const { return static_cast<int>(vertices_.size()); }
  int shape_dim() const { return shape_dim_; }
  const std::vector<Joint>& joints() const { return joints_; }
  const std::vector<Vertex>& vertices() const { return vertices_; }
  const std::vector<int>& eval_joints() const { return eval_joints_; }
  const std::vector<int>& traversal_order() const { return order_; }

  // Bone offsets for a given shape: column j = rest_offset_j + basis_j * beta.
  Mat bone_offsets(const Vec& beta) const;

  FkResult forward_kinematics(const Mat& theta, const Vec& beta) const;
  FkResult forward_kinematics(const BodyParams& p) const {
    return forward_kinematics(p.theta, p.beta);
  }

  // Differentiable FK from per-joint rotation-matrix nodes and a shape node.
  FkVars fk_graph(const std::vector<Var>& rot_local, const Var& beta,
                  bool with_vertices = false) const;

  // Construction from parts (validates); used by tests and the asset author.
  BodyModel(std::vector<Joint> joints, std::vector<Vertex> vertices,
            std::vector<int> eval_joints);

 private:
  void validate() const;
  void build_caches();

  std::vector<Joint> joints_;
  std::vector<Vertex> vertices_;
  std::vector<int> eval_joints_;
  std::vector<int> order_;  // parents before children
  int shape_dim_ = 0;
  Mat rest_flat_;   // 3J x 1
  Mat basis_flat_;  // 3J x B
};

// p2d = s * (x, y) + t per point. points3d is 3 x N, result 2 x N.
Mat project_weak_perspective(const Mat& points3d, double s, const Eigen::Vector2d& t);
Var project_weak_perspective(const Var& points3d, const Var& s, const Var& t);

}  // namespace tempose::body
