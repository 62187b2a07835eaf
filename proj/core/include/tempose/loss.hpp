// SPDX-License-Identifier: Apache-2.0
//
// Training loss. Each supervised branch contributes four L2 terms: rotation
// matrices, shape coefficients, root-aligned 3D joints, and weak-perspective
// 2D joints projected with the branch's own predicted camera.

#pragma once

#include "tempose/body_model.hpp"
#include "tempose/network.hpp"
#include "tempose/regressor.hpp"
#include "tempose/tensor.hpp"

namespace tempose {

enum class SupervisionTarget {
  current,   // past/future branches supervised with current-frame truth
  adjacent,  // past branch gets frame c-1 truth, future gets c+1
  none,      // only the integrated branch is supervised
};

const char* to_string(SupervisionTarget t);
SupervisionTarget supervision_target_from_string(const std::string& s);

struct LossWeights {
  double pose = 60.0;
  double shape = 0.06;
  double j3d = 300.0;
  double j2d = 300.0;
  SupervisionTarget supervision_target = SupervisionTarget::current;

  void validate() const;  // weights >= 0, at least one > 0
};

// Ground truth for one window: the current frame plus its two neighbours
// (only read in adjacent supervision mode).
struct WindowGroundTruth {
  body::BodyParams current;
  body::BodyParams past_adjacent;
  body::BodyParams future_adjacent;
};

// Weighted term values, accumulated over the supervised branches of a window.
struct LossBreakdown {
  double pose = 0;
  double shape = 0;
  double j3d = 0;
  double j2d = 0;
  double total = 0;
  int branches = 0;

  LossBreakdown& operator+=(const LossBreakdown& o);
};

// Loss of one branch against one ground-truth frame. Exposed separately so a
// term-sum oracle can recompute window_loss from its pieces.
Var branch_loss(const DecodedParams& pred, const body::BodyModel& model,
                const body::BodyParams& gt, const LossWeights& w,
                LossBreakdown* breakdown = nullptr);

// Loss of window `col` of a batched forward pass. Supervises the integrated
// branch always and the past/future branches per w.supervision_target.
Var window_loss(const BranchOutputs& outs, Eigen::Index col,
                const body::BodyModel& model, const WindowGroundTruth& gt,
                const LossWeights& w, LossBreakdown* breakdown = nullptr);

}  // namespace tempose
