// SPDX-License-Identifier: Apache-2.0

#include "tempose/body_model.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tempose::body {

using nlohmann::json;

Vec BodyParams::flatten() const {
  const int j = static_cast<int>(theta.cols());
  const int b = static_cast<int>(beta.size());
  Vec out(params_dim(j, b));
  out.head(3 * j) = Eigen::Map<const Vec>(theta.data(), 3 * j);
  out.segment(3 * j, b) = beta;
  out(3 * j + b) = cam_s;
  out.tail(2) = cam_t;
  return out;
}

BodyParams BodyParams::unflatten(const Vec& v, int joints, int shape_dim) {
  if (v.size() != params_dim(joints, shape_dim))
    throw std::invalid_argument("BodyParams::unflatten: length mismatch");
  BodyParams p;
  p.theta = Eigen::Map<const Mat>(v.data(), 3, joints);
  p.beta = v.segment(3 * joints, shape_dim);
  p.cam_s = v(3 * joints + shape_dim);
  p.cam_t = v.tail(2);
  return p;
}

BodyModel::BodyModel(std::vector<Joint> joints, std::vector<Vertex> vertices,
                     std::vector<int> eval_joints)
    : joints_(std::move(joints)),
      vertices_(std::move(vertices)),
      eval_joints_(std::move(eval_joints)) {
  shape_dim_ = joints_.empty() ? 0 : static_cast<int>(joints_[0].shape_basis.cols());
  validate();
  build_caches();
}

void BodyModel::validate() const {
  if (joints_.empty()) throw std::invalid_argument("body model: no joints");
  if (joints_[0].parent != -1)
    throw std::invalid_argument("body model: joints[0].parent must be -1 (root)");
  const int j = joint_count();
  for (int i = 1; i < j; ++i) {
    if (joints_[i].parent < 0 || joints_[i].parent >= j)
      throw std::invalid_argument("body model: joints[" + std::to_string(i) +
                                  "].parent out of range");
  }
  // Every joint must reach the root; a walk longer than J implies a cycle.
  for (int i = 0; i < j; ++i) {
    int cur = i, steps = 0;
    while (cur != 0) {
      cur = joints_[cur].parent;
      if (++steps > j)
        throw std::invalid_argument("body model: cycle through joints[" +
                                    std::to_string(i) + "].parent");
    }
  }
  for (int i = 0; i < j; ++i) {
    if (joints_[i].shape_basis.rows() != 3 ||
        joints_[i].shape_basis.cols() != shape_dim_)
      throw std::invalid_argument("body model: joints[" + std::to_string(i) +
                                  "].shape_basis must be " + std::to_string(shape_dim_) +
                                  " columns of 3");
  }
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    if (vertices_[i].joint < 0 || vertices_[i].joint >= j)
      throw std::invalid_argument("body model: vertices[" + std::to_string(i) +
                                  "].joint out of range");
  }
  for (int e : eval_joints_) {
    if (e < 0 || e >= j)
      throw std::invalid_argument("body model: eval_joints entry out of range");
  }
}

void BodyModel::build_caches() {
  const int j = joint_count();
  order_.clear();
  order_.reserve(j);
  std::vector<bool> placed(j, false);
  placed[0] = true;
  order_.push_back(0);
  while (static_cast<int>(order_.size()) < j) {
    for (int i = 1; i < j; ++i) {
      if (!placed[i] && placed[joints_[i].parent]) {
        placed[i] = true;
        order_.push_back(i);
      }
    }
  }
  rest_flat_.resize(3 * j, 1);
  basis_flat_.resize(3 * j, shape_dim_);
  for (int i = 0; i < j; ++i) {
    rest_flat_.block<3, 1>(3 * i, 0) = joints_[i].rest_offset;
    basis_flat_.middleRows(3 * i, 3) = joints_[i].shape_basis;
  }
}

Mat BodyModel::bone_offsets(const Vec& beta) const {
  if (beta.size() != shape_dim_)
    throw std::invalid_argument("bone_offsets: beta length mismatch");
  Mat flat = rest_flat_ + basis_flat_ * beta;
  return Eigen::Map<const Mat>(flat.data(), 3, joint_count());
}

FkResult BodyModel::forward_kinematics(const Mat& theta, const Vec& beta) const {
  const int j = joint_count();
  if (theta.rows() != 3 || theta.cols() != j)
    throw std::invalid_argument("forward_kinematics: theta must be 3 x J");
  Mat offs = bone_offsets(beta);

  std::vector<rot::Mat3> rg(j);
  FkResult out;
  out.joints.resize(3, j);
  for (int k : order_) {
    rot::Mat3 rl = rot::axis_angle_to_matrix(theta.col(k));
    if (k == 0) {
      rg[0] = rl;
      out.joints.col(0) = offs.col(0);
    } else {
      const int p = joints_[k].parent;
      rg[k] = rg[p] * rl;
      out.joints.col(k) = out.joints.col(p) + rg[p] * offs.col(k);
    }
  }
  out.vertices.resize(3, vertex_count());
  for (int v = 0; v < vertex_count(); ++v) {
    const Vertex& vx = vertices_[v];
    out.vertices.col(v) = out.joints.col(vx.joint) + rg[vx.joint] * vx.offset;
  }
  return out;
}

FkVars BodyModel::fk_graph(const std::vector<Var>& rot_local, const Var& beta,
                           bool with_vertices) const {
  const int j = joint_count();
  if (static_cast<int>(rot_local.size()) != j)
    throw std::invalid_argument("fk_graph: need one rotation node per joint");
  if (beta.rows() != shape_dim_ || beta.cols() != 1)
    throw std::invalid_argument("fk_graph: beta must be B x 1");

  Var offs_flat = add(Var::constant(rest_flat_),
                      matmul(Var::constant(basis_flat_), beta));
  Var offs = reshape(offs_flat, 3, j);

  FkVars out;
  out.rot_global.resize(j);
  std::vector<Var> pos(j);
  for (int k : order_) {
    if (k == 0) {
      out.rot_global[0] = rot_local[0];
      pos[0] = slice_cols(offs, 0, 1);
    } else {
      const int p = joints_[k].parent;
      out.rot_global[k] = matmul(out.rot_global[p], rot_local[k]);
      pos[k] = add(pos[p], matmul(out.rot_global[p], slice_cols(offs, k, 1)));
    }
  }
  out.joints = concat_cols(pos);
  if (with_vertices && vertex_count() > 0) {
    std::vector<Var> vs;
    vs.reserve(vertices_.size());
    for (const Vertex& vx : vertices_) {
      vs.push_back(add(pos[vx.joint],
                       matmul(out.rot_global[vx.joint], Var::constant(vx.offset))));
    }
    out.vertices = concat_cols(vs);
  }
  return out;
}

Mat project_weak_perspective(const Mat& points3d, double s, const Eigen::Vector2d& t) {
  if (points3d.rows() != 3)
    throw std::invalid_argument("project_weak_perspective: points must be 3 x N");
  return (s * points3d.topRows(2)).colwise() + t;
}

Var project_weak_perspective(const Var& points3d, const Var& s, const Var& t) {
  if (points3d.rows() != 3)
    throw std::invalid_argument("project_weak_perspective: points must be 3 x N");
  return add_colwise(scale(slice_rows(points3d, 0, 2), s), t);
}

// -- JSON schema -----------------------------------------------------------

static rot::Vec3 vec3_from(const json& a, const std::string& where) {
  if (!a.is_array() || a.size() != 3)
    throw std::invalid_argument("body model: " + where + " must be [x, y, z]");
  return {a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
}

BodyModel BodyModel::from_json_text(const std::string& text) {
  json doc = json::parse(text);
  std::vector<Joint> joints;
  std::vector<Vertex> vertices;

  if (!doc.contains("joints") || !doc["joints"].is_array() || doc["joints"].empty())
    throw std::invalid_argument("body model: missing joints array");

  int shape_dim = -1;
  for (const auto& jj : doc["joints"]) {
    Joint jt;
    jt.name = jj.at("name").get<std::string>();
    jt.parent = jj.at("parent").get<int>();
    jt.rest_offset = vec3_from(jj.at("rest_offset"), "rest_offset of " + jt.name);
    const auto& basis = jj.at("shape_basis");
    if (!basis.is_array())
      throw std::invalid_argument("body model: shape_basis of " + jt.name +
                                  " must be an array");
    if (shape_dim < 0) shape_dim = static_cast<int>(basis.size());
    if (static_cast<int>(basis.size()) != shape_dim)
      throw std::invalid_argument("body model: shape_basis of " + jt.name + " has " +
                                  std::to_string(basis.size()) + " columns, expected " +
                                  std::to_string(shape_dim));
    jt.shape_basis.resize(3, shape_dim);
    for (int c = 0; c < shape_dim; ++c)
      jt.shape_basis.col(c) = vec3_from(basis[c], "shape_basis of " + jt.name);
    joints.push_back(std::move(jt));
  }

  if (doc.contains("vertices")) {
    for (const auto& vv : doc["vertices"]) {
      Vertex vx;
      vx.joint = vv.at("joint").get<int>();
      vx.offset = vec3_from(vv.at("offset"), "vertex offset");
      vertices.push_back(vx);
    }
  }

  std::vector<int> eval_joints;
  if (doc.contains("eval_joints")) {
    for (const auto& name : doc["eval_joints"]) {
      const std::string n = name.get<std::string>();
      int found = -1;
      for (std::size_t i = 0; i < joints.size(); ++i)
        if (joints[i].name == n) found = static_cast<int>(i);
      if (found < 0)
        throw std::invalid_argument("body model: eval_joints names unknown joint '" +
                                    n + "'");
      eval_joints.push_back(found);
    }
  }
  return BodyModel(std::move(joints), std::move(vertices), std::move(eval_joints));
}

BodyModel BodyModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("body model: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string BodyModel::to_json_text() const {
  json doc;
  doc["joints"] = json::array();
  for (const Joint& jt : joints_) {
    json jj;
    jj["name"] = jt.name;
    jj["parent"] = jt.parent;
    jj["rest_offset"] = {jt.rest_offset.x(), jt.rest_offset.y(), jt.rest_offset.z()};
    json basis = json::array();
    for (int c = 0; c < shape_dim_; ++c)
      basis.push_back({jt.shape_basis(0, c), jt.shape_basis(1, c), jt.shape_basis(2, c)});
    jj["shape_basis"] = std::move(basis);
    doc["joints"].push_back(std::move(jj));
  }
  doc["vertices"] = json::array();
  for (const Vertex& vx : vertices_) {
    doc["vertices"].push_back(
        {{"joint", vx.joint}, {"offset", {vx.offset.x(), vx.offset.y(), vx.offset.z()}}});
  }
  doc["eval_joints"] = json::array();
  for (int e : eval_joints_) doc["eval_joints"].push_back(joints_[e].name);
  return doc.dump(2);
}

void BodyModel::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("body model: cannot write " + path);
  out << to_json_text() << "\n";
}

}  // namespace tempose::body
