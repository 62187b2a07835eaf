// SPDX-License-Identifier: Apache-2.0
//
// Average filter over predicted body-parameter sequences. Per-joint rotations
// are averaged in quaternion space by a left-fold of pairwise slerps with
// weights 1/k; shape and camera channels use a plain moving average. The
// window stays centered: near sequence edges it shrinks symmetrically.

#pragma once

#include "tempose/body_model.hpp"
#include "tempose/evaluator.hpp"
#include "tempose/rotations.hpp"

#include <span>
#include <vector>

namespace tempose {

// Left-fold running mean on the rotation group: a_1 = q_1,
// a_k = slerp(a_{k-1}, q_k, 1/k). Empty input rejected.
rot::Quat slerp_average(std::span<const rot::Quat> qs);

// window must be odd and >= 1; window 1 is the identity.
std::vector<body::BodyParams> smooth_params(
    const std::vector<body::BodyParams>& seq, int window);

PredictionSet smooth_predictions(const PredictionSet& preds, int window);

}  // namespace tempose
