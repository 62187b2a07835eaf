// SPDX-License-Identifier: Apache-2.0

#include "tempose/loss.hpp"

#include <stdexcept>

namespace tempose {

const char* to_string(SupervisionTarget t) {
  switch (t) {
    case SupervisionTarget::current: return "current";
    case SupervisionTarget::adjacent: return "adjacent";
    case SupervisionTarget::none: return "none";
  }
  return "?";
}

SupervisionTarget supervision_target_from_string(const std::string& s) {
  if (s == "current") return SupervisionTarget::current;
  if (s == "adjacent") return SupervisionTarget::adjacent;
  if (s == "none") return SupervisionTarget::none;
  throw std::invalid_argument("unknown supervision target: " + s);
}

void LossWeights::validate() const {
  if (pose < 0 || shape < 0 || j3d < 0 || j2d < 0)
    throw std::invalid_argument("LossWeights: weights must be nonnegative");
  if (pose == 0 && shape == 0 && j3d == 0 && j2d == 0)
    throw std::invalid_argument("LossWeights: at least one weight must be positive");
}

LossBreakdown& LossBreakdown::operator+=(const LossBreakdown& o) {
  pose += o.pose;
  shape += o.shape;
  j3d += o.j3d;
  j2d += o.j2d;
  total += o.total;
  branches += o.branches;
  return *this;
}

namespace {

// Translate columns so column `root` sits at the origin.
Mat root_align(const Mat& pts, int root = 0) {
  return pts.colwise() - Eigen::Vector3d(pts.col(root));
}

Var root_align(const Var& pts) { return sub_colwise(pts, block(pts, 0, 0, 3, 1)); }

}  // namespace

Var branch_loss(const DecodedParams& pred, const body::BodyModel& model,
                const body::BodyParams& gt, const LossWeights& w,
                LossBreakdown* breakdown) {
  const int joints = model.joint_count();
  if (static_cast<int>(pred.rot.size()) != joints)
    throw std::invalid_argument("branch_loss: rotation count mismatch");
  if (gt.theta.cols() != joints || gt.beta.size() != model.shape_dim())
    throw std::invalid_argument("branch_loss: ground truth dims mismatch");

  // Ground-truth targets are plain constants.
  Mat gt_rots(3, 3 * joints);
  for (int j = 0; j < joints; ++j)
    gt_rots.middleCols<3>(3 * j) = rot::axis_angle_to_matrix(gt.theta.col(j));
  body::FkResult gt_fk = model.forward_kinematics(gt.theta, gt.beta);
  Mat gt_j3d = root_align(gt_fk.joints);
  Mat gt_j2d = body::project_weak_perspective(gt_j3d, gt.cam_s, gt.cam_t);

  Var pred_rots = concat_cols(pred.rot);
  Var pose_term = squared_norm(pred_rots - Var::constant(gt_rots));
  Var shape_term = squared_norm(pred.beta - Var::constant(Mat(gt.beta)));

  body::FkVars fk = model.fk_graph(pred.rot, pred.beta, false);
  Var aligned = root_align(fk.joints);
  Var j3d_term = squared_norm(aligned - Var::constant(gt_j3d));
  Var pred_2d = body::project_weak_perspective(aligned, pred.cam_s, pred.cam_t);
  Var j2d_term = squared_norm(pred_2d - Var::constant(gt_j2d));

  Var total = cmul(pose_term, w.pose) + cmul(shape_term, w.shape) +
              cmul(j3d_term, w.j3d) + cmul(j2d_term, w.j2d);
  if (breakdown != nullptr) {
    breakdown->pose += w.pose * pose_term.scalar_value();
    breakdown->shape += w.shape * shape_term.scalar_value();
    breakdown->j3d += w.j3d * j3d_term.scalar_value();
    breakdown->j2d += w.j2d * j2d_term.scalar_value();
    breakdown->total += total.scalar_value();
    breakdown->branches += 1;
  }
  return total;
}

Var window_loss(const BranchOutputs& outs, Eigen::Index col,
                const body::BodyModel& model, const WindowGroundTruth& gt,
                const LossWeights& w, LossBreakdown* breakdown) {
  w.validate();
  const int joints = model.joint_count();
  const int shape_dim = model.shape_dim();

  DecodedParams d_int = decode_column(outs.raw_int, col, joints, shape_dim);
  Var total = branch_loss(d_int, model, gt.current, w, breakdown);
  if (!outs.raw_past.valid() || w.supervision_target == SupervisionTarget::none)
    return total;

  const body::BodyParams& past_gt =
      w.supervision_target == SupervisionTarget::adjacent ? gt.past_adjacent
                                                          : gt.current;
  const body::BodyParams& future_gt =
      w.supervision_target == SupervisionTarget::adjacent ? gt.future_adjacent
                                                          : gt.current;
  DecodedParams d_past = decode_column(outs.raw_past, col, joints, shape_dim);
  DecodedParams d_future = decode_column(outs.raw_future, col, joints, shape_dim);
  total = total + branch_loss(d_past, model, past_gt, w, breakdown);
  total = total + branch_loss(d_future, model, future_gt, w, breakdown);
  return total;
}

}  // namespace tempose
