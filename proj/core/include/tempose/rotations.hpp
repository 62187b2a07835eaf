// SPDX-License-Identifier: Apache-2.0
//
// Rotation representations and conversions. Conventions, pinned by tests:
//  - axis-angle is axis * angle with angle canonicalized to [0, pi]
//  - quaternions are unit (w, x, y, z) with canonical sign w >= 0
//  - the 6D representation stacks two 3-vectors (a1, a2); Gram-Schmidt gives
//    b1 = a1/|a1|, b2 = normalize(a2 - (b1.a2) b1), b3 = b1 x b2, R = [b1 b2 b3]

#pragma once

#include "tempose/tensor.hpp"

#include <Eigen/Dense>

namespace tempose::rot {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Rot6d = Eigen::Matrix<double, 6, 1>;

struct Quat {
  double w = 1, x = 0, y = 0, z = 0;

  double dot(const Quat& o) const { return w * o.w + x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(dot(*this)); }
  Quat normalized() const;
  // Flips sign so that w >= 0.
  Quat canonical() const;
  Quat negated() const { return {-w, -x, -y, -z}; }
};

// Throws std::invalid_argument when |a1| or the orthogonalized a2 is
// numerically zero (below 1e-8).
Mat3 rot6d_to_matrix(const Rot6d& r);

// Inverse exponential map; result has norm in [0, pi]. Near-pi rotations use
// the largest-diagonal branch.
Vec3 matrix_to_axis_angle(const Mat3& r);

Mat3 axis_angle_to_matrix(const Vec3& aa);

Quat axis_angle_to_quaternion(const Vec3& aa);
Vec3 quaternion_to_axis_angle(const Quat& q);

// Shortest-arc spherical interpolation; u must lie in [0, 1]. The result is
// canonicalized (w >= 0).
Quat slerp(const Quat& q0, const Quat& q1, double u);

// True when R^T R = I and det R = 1 within tol.
bool is_rotation_matrix(const Mat3& r, double tol = 1e-9);

// Angle of the relative rotation between two unit quaternions, in [0, pi].
double quat_angle(const Quat& a, const Quat& b);

// Differentiable 6D -> rotation-matrix node (input 6x1, output 3x3).
Var rot6d_to_matrix(const Var& r);

}  // namespace tempose::rot
