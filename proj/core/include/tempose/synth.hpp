// SPDX-License-Identifier: Apache-2.0
//
// Synthetic data: band-limited articulated motion plus a frozen nonlinear
// feature map standing in for a per-frame image backbone. Everything is
// deterministic given (config, seed).

#pragma once

#include "tempose/body_model.hpp"
#include "tempose/tensor.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace tempose {

// Splittable seed derivation: sequence k of a master seed gets an
// independent, reproducible stream.
std::uint64_t splitmix64(std::uint64_t& state);
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

struct MotionGenConfig {
  int frames = 60;
  double fps = 25.0;
  int harmonics = 3;             // sinusoids per rotation channel
  double max_frequency_hz = 2.0; // band limit; snapped to whole DFT bins
  double amplitude = 0.35;       // radians; 0 collapses to the rest pose
  double root_gain = 1.5;        // global-orientation amplitude multiplier
  double shape_range = 3.0;      // beta ~ U[-range, range], constant per sequence
  double cam_s_base = 1.0;
  double cam_s_wobble = 0.05;
  double cam_t_wobble = 0.05;

  void validate() const;
  // Largest whole DFT bin within the band; sinusoid frequencies are
  // bin * fps / frames for bins in [1, this].
  int max_bin() const;
};

struct MotionSequence {
  std::string id;
  double fps = 0;
  std::vector<body::BodyParams> params;
  std::vector<Mat> joints;    // 3 x J per frame, FK of params
  std::vector<Mat> vertices;  // 3 x V per frame

  int frames() const { return static_cast<int>(params.size()); }
};

MotionSequence generate_motion(const body::BodyModel& model,
                               const MotionGenConfig& cfg, std::uint64_t seed,
                               const std::string& id = "");

struct FeatureGenConfig {
  int feature_dim = 96;
  double noise = 0.1;          // per-entry Gaussian sigma
  double outlier_prob = 0.05;  // chance a frame's noise is amplified
  double outlier_factor = 5.0;

  void validate() const;
};

// Frozen map phi(p) = W2 tanh(W1 p + b1) + b2 from flattened body parameters
// to features. Created once per dataset seed, never trained.
class FeatureEncoder {
 public:
  FeatureEncoder() = default;
  static FeatureEncoder create(int param_dim, int feature_dim,
                               std::uint64_t seed);

  Vec encode(const Vec& flat_params) const;  // deterministic, no noise
  int param_dim() const { return static_cast<int>(w1_.cols()); }
  int feature_dim() const { return static_cast<int>(w2_.rows()); }

  // Weight access for the dataset container round trip.
  const Mat& w1() const { return w1_; }
  const Vec& b1() const { return b1_; }
  const Mat& w2() const { return w2_; }
  const Vec& b2() const { return b2_; }
  static FeatureEncoder from_weights(Mat w1, Vec b1, Mat w2, Vec b2);

 private:
  Mat w1_, w2_;
  Vec b1_, b2_;
};

// Noisy per-frame features for one sequence, one column per frame.
// Rejects feature_dim < param_dim (the map must not lose pose information).
Mat encode_features(const MotionSequence& motion, const FeatureEncoder& enc,
                    const FeatureGenConfig& cfg, std::uint64_t seed);

// Sliding windows over a sequence of `frames` frames. Windows that would
// cross the sequence end are not produced.
struct SequenceWindow {
  int sequence = 0;  // index into the owning split
  int start = 0;     // first frame
  int current = 0;   // absolute index of the current frame
};

std::vector<SequenceWindow> make_windows(int frames, int window, int stride,
                                         int sequence_index = 0);

}  // namespace tempose
