// SPDX-License-Identifier: Apache-2.0

#include "tempose/rotations.hpp"

#include <cmath>
#include <stdexcept>

namespace tempose::rot {

namespace {

constexpr double kDegenerate = 1e-8;

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

}  // namespace

Quat Quat::normalized() const {
  double n = norm();
  return {w / n, x / n, y / n, z / n};
}

Quat Quat::canonical() const { return w < 0 ? negated() : *this; }

Mat3 rot6d_to_matrix(const Rot6d& r) {
  Vec3 a1 = r.head<3>(), a2 = r.tail<3>();
  double n1 = a1.norm();
  if (n1 < kDegenerate)
    throw std::invalid_argument("rot6d_to_matrix: first 3-vector is numerically zero");
  Vec3 b1 = a1 / n1;
  Vec3 w = a2 - b1.dot(a2) * b1;
  double n2 = w.norm();
  if (n2 < kDegenerate)
    throw std::invalid_argument(
        "rot6d_to_matrix: second 3-vector is parallel to the first");
  Vec3 b2 = w / n2;
  Mat3 out;
  out.col(0) = b1;
  out.col(1) = b2;
  out.col(2) = b1.cross(b2);
  return out;
}

Vec3 matrix_to_axis_angle(const Mat3& r) {
  // sin(theta) * axis from the skew part, cos(theta) from the trace.
  Vec3 v(0.5 * (r(2, 1) - r(1, 2)), 0.5 * (r(0, 2) - r(2, 0)),
         0.5 * (r(1, 0) - r(0, 1)));
  double s = v.norm();
  double c = std::clamp(0.5 * (r.trace() - 1.0), -1.0, 1.0);
  double theta = std::atan2(s, c);

  if (theta < 1e-4) {
    // v = sin(theta)*axis; theta/sin ~ 1 + theta^2/6
    return v * (1.0 + theta * theta / 6.0);
  }
  if (theta < M_PI - 1e-3) {
    return v * (theta / s);
  }
  // Near pi the skew part vanishes; recover axis*axis^T from the symmetric part.
  Mat3 m = ((0.5 * (r + r.transpose())) - c * Mat3::Identity()) / (1.0 - c);
  int k;
  m.diagonal().maxCoeff(&k);
  Vec3 axis;
  axis[k] = std::sqrt(std::max(m(k, k), 0.0));
  for (int i = 0; i < 3; ++i)
    if (i != k) axis[i] = m(k, i) / axis[k];
  axis.normalize();
  if (s > 1e-12) {
    if (axis.dot(v) < 0) axis = -axis;
  } else {
    // Angle is pi up to noise; both signs are valid, pick one deterministically.
    int j = 0;
    axis.cwiseAbs().maxCoeff(&j);
    if (axis[j] < 0) axis = -axis;
  }
  return axis * theta;
}

Mat3 axis_angle_to_matrix(const Vec3& aa) {
  double theta = aa.norm();
  Mat3 k = skew(aa);
  double a, b;  // sin(t)/t and (1-cos(t))/t^2
  if (theta < 1e-4) {
    double t2 = theta * theta;
    a = 1.0 - t2 / 6.0;
    b = 0.5 - t2 / 24.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / (theta * theta);
  }
  return Mat3::Identity() + a * k + b * k * k;
}

Quat axis_angle_to_quaternion(const Vec3& aa) {
  double theta = aa.norm();
  double w = std::cos(0.5 * theta);
  double s;  // sin(t/2)/t
  if (theta < 1e-4) {
    s = 0.5 - theta * theta / 48.0;
  } else {
    s = std::sin(0.5 * theta) / theta;
  }
  return Quat{w, s * aa.x(), s * aa.y(), s * aa.z()}.canonical();
}

Vec3 quaternion_to_axis_angle(const Quat& q_in) {
  Quat q = q_in.normalized().canonical();
  Vec3 xyz(q.x, q.y, q.z);
  double n = xyz.norm();
  double theta = 2.0 * std::atan2(n, q.w);
  if (n < 1e-9) return 2.0 * xyz;
  return xyz * (theta / n);
}

Quat slerp(const Quat& q0_in, const Quat& q1_in, double u) {
  if (u < 0.0 || u > 1.0)
    throw std::invalid_argument("slerp: interpolation parameter must be in [0, 1]");
  Quat q0 = q0_in.normalized();
  Quat q1 = q1_in.normalized();
  double d = q0.dot(q1);
  if (d < 0) {
    q1 = q1.negated();
    d = -d;
  }
  double w0, w1;
  if (d > 1.0 - 1e-12) {
    // Nearly identical; linear blend keeps full precision.
    w0 = 1.0 - u;
    w1 = u;
  } else {
    double omega = std::acos(std::clamp(d, -1.0, 1.0));
    double so = std::sin(omega);
    w0 = std::sin((1.0 - u) * omega) / so;
    w1 = std::sin(u * omega) / so;
  }
  Quat out{w0 * q0.w + w1 * q1.w, w0 * q0.x + w1 * q1.x, w0 * q0.y + w1 * q1.y,
           w0 * q0.z + w1 * q1.z};
  return out.normalized().canonical();
}

bool is_rotation_matrix(const Mat3& r, double tol) {
  return (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol &&
         std::abs(r.determinant() - 1.0) <= tol;
}

double quat_angle(const Quat& a, const Quat& b) {
  double d = std::clamp(std::abs(a.normalized().dot(b.normalized())), 0.0, 1.0);
  return 2.0 * std::acos(d);
}

Var rot6d_to_matrix(const Var& r) {
  if (r.rows() != 6 || r.cols() != 1)
    throw std::invalid_argument("rot6d_to_matrix: input must be 6x1");
  Rot6d rv = r.value();
  Mat3 rm = rot6d_to_matrix(rv);
  return make_op("rot6d_to_matrix", rm, {r}, [](detail::Node& n) {
    if (!n.parents[0]->requires_grad) return;
    // Recompute the intermediates of the Gram-Schmidt chain.
    Vec3 a1 = n.parents[0]->value.block<3, 1>(0, 0);
    Vec3 a2 = n.parents[0]->value.block<3, 1>(3, 0);
    Vec3 b1 = n.value.col(0), b2 = n.value.col(1);
    double un = a1.norm();
    double d = b1.dot(a2);
    double wn = (a2 - d * b1).norm();

    Vec3 g1 = n.grad.col(0), g2 = n.grad.col(1), g3 = n.grad.col(2);
    Vec3 gb2 = g2 + g3.cross(b1);
    Vec3 gb1 = g1 + b2.cross(g3);
    // b2 = w/|w|
    Vec3 gw = (gb2 - b2 * b2.dot(gb2)) / wn;
    // w = a2 - (b1.a2) b1
    Vec3 ga2 = gw - b1 * b1.dot(gw);
    gb1 += -a2 * b1.dot(gw) - d * gw;
    // b1 = a1/|a1|
    Vec3 ga1 = (gb1 - b1 * b1.dot(gb1)) / un;

    Mat& pg = n.parents[0]->ensure_grad();
    pg.block<3, 1>(0, 0) += ga1;
    pg.block<3, 1>(3, 0) += ga2;
  });
}

}  // namespace tempose::rot
