// SPDX-License-Identifier: Apache-2.0

#include "tempose/smoothing.hpp"

#include <algorithm>
#include <stdexcept>

namespace tempose {

rot::Quat slerp_average(std::span<const rot::Quat> qs) {
  if (qs.empty()) throw std::invalid_argument("slerp_average: empty input");
  rot::Quat avg = qs[0].normalized().canonical();
  for (std::size_t k = 1; k < qs.size(); ++k)
    avg = rot::slerp(avg, qs[k], 1.0 / static_cast<double>(k + 1));
  return avg;
}

std::vector<body::BodyParams> smooth_params(
    const std::vector<body::BodyParams>& seq, int window) {
  if (window < 1 || window % 2 == 0)
    throw std::invalid_argument("smooth_params: window must be odd and >= 1");
  if (seq.empty()) return {};
  const int n = static_cast<int>(seq.size());
  const int joints = static_cast<int>(seq[0].theta.cols());
  const int half = window / 2;

  // Quaternion tracks once up front; canonical sign keeps slerp on the
  // shortest arc between neighbouring frames.
  std::vector<std::vector<rot::Quat>> tracks(static_cast<std::size_t>(joints));
  for (int j = 0; j < joints; ++j) {
    tracks[static_cast<std::size_t>(j)].reserve(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t)
      tracks[static_cast<std::size_t>(j)].push_back(
          rot::axis_angle_to_quaternion(seq[static_cast<std::size_t>(t)].theta.col(j)));
  }

  std::vector<body::BodyParams> out(seq.begin(), seq.end());
  for (int t = 0; t < n; ++t) {
    const int h = std::min({half, t, n - 1 - t});
    if (h == 0) continue;
    const int lo = t - h;
    const int count = 2 * h + 1;
    body::BodyParams& p = out[static_cast<std::size_t>(t)];
    for (int j = 0; j < joints; ++j) {
      std::span<const rot::Quat> win(
          tracks[static_cast<std::size_t>(j)].data() + lo,
          static_cast<std::size_t>(count));
      p.theta.col(j) = rot::quaternion_to_axis_angle(slerp_average(win));
    }
    Vec beta = Vec::Zero(seq[0].beta.size());
    double s = 0;
    Eigen::Vector2d cam_t = Eigen::Vector2d::Zero();
    for (int i = lo; i < lo + count; ++i) {
      const body::BodyParams& q = seq[static_cast<std::size_t>(i)];
      beta += q.beta;
      s += q.cam_s;
      cam_t += q.cam_t;
    }
    const double inv = 1.0 / static_cast<double>(count);
    p.beta = beta * inv;
    p.cam_s = s * inv;
    p.cam_t = cam_t * inv;
  }
  return out;
}

PredictionSet smooth_predictions(const PredictionSet& preds, int window) {
  PredictionSet out = preds;
  for (auto& seq : out.params) seq = smooth_params(seq, window);
  return out;
}

}  // namespace tempose
