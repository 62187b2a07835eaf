// SPDX-License-Identifier: Apache-2.0

#include "tempose/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace tempose {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t s = master;
  std::uint64_t out = 0;
  for (std::uint64_t i = 0; i <= stream; ++i) out = splitmix64(s);
  return out;
}

void MotionGenConfig::validate() const {
  if (frames < 3) throw std::invalid_argument("MotionGenConfig: frames < 3");
  if (fps <= 0) throw std::invalid_argument("MotionGenConfig: fps <= 0");
  if (harmonics < 1) throw std::invalid_argument("MotionGenConfig: harmonics < 1");
  if (max_frequency_hz <= 0 || amplitude < 0 || root_gain < 0 || shape_range < 0)
    throw std::invalid_argument("MotionGenConfig: negative generation parameter");
  if (cam_s_base <= 0)
    throw std::invalid_argument("MotionGenConfig: camera scale must be positive");
  if (max_bin() < 1)
    throw std::invalid_argument(
        "MotionGenConfig: band limit below the first DFT bin; raise "
        "max_frequency_hz or frames");
}

int MotionGenConfig::max_bin() const {
  return static_cast<int>(std::floor(max_frequency_hz * frames / fps));
}

namespace {

// One band-limited channel: mean + sum of on-bin sinusoids. On-bin
// frequencies make the discrete spectrum exactly zero above the band.
struct Channel {
  double mean = 0;
  std::vector<double> amp, phase;
  std::vector<int> bin;

  double at(int t, int frames) const {
    double v = mean;
    for (std::size_t k = 0; k < amp.size(); ++k)
      v += amp[k] * std::sin(2.0 * std::numbers::pi * bin[k] * t / frames +
                             phase[k]);
    return v;
  }
};

Channel make_channel(std::mt19937_64& rng, const MotionGenConfig& cfg,
                     double amplitude) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::uniform_int_distribution<int> bins(1, cfg.max_bin());
  Channel c;
  c.mean = 0.5 * amplitude * unit(rng);
  for (int k = 0; k < cfg.harmonics; ++k) {
    c.amp.push_back(amplitude / cfg.harmonics * unit(rng));
    c.phase.push_back(phase(rng));
    c.bin.push_back(bins(rng));
  }
  return c;
}

}  // namespace

MotionSequence generate_motion(const body::BodyModel& model,
                               const MotionGenConfig& cfg, std::uint64_t seed,
                               const std::string& id) {
  cfg.validate();
  std::mt19937_64 rng(seed);
  const int joints = model.joint_count();
  const int shape_dim = model.shape_dim();

  std::vector<Channel> channels;
  channels.reserve(static_cast<std::size_t>(3 * joints));
  for (int j = 0; j < joints; ++j) {
    const double amp = cfg.amplitude * (j == 0 ? cfg.root_gain : 1.0);
    for (int a = 0; a < 3; ++a) channels.push_back(make_channel(rng, cfg, amp));
  }
  std::uniform_real_distribution<double> shape(-cfg.shape_range, cfg.shape_range);
  Vec beta(shape_dim);
  for (int b = 0; b < shape_dim; ++b) beta(b) = shape(rng);

  Channel cam_s = make_channel(rng, cfg, cfg.cam_s_wobble);
  Channel cam_tx = make_channel(rng, cfg, cfg.cam_t_wobble);
  Channel cam_ty = make_channel(rng, cfg, cfg.cam_t_wobble);

  MotionSequence seq;
  seq.id = id.empty() ? "seq-" + std::to_string(seed) : id;
  seq.fps = cfg.fps;
  seq.params.reserve(static_cast<std::size_t>(cfg.frames));
  for (int t = 0; t < cfg.frames; ++t) {
    body::BodyParams p;
    p.theta.resize(3, joints);
    for (int j = 0; j < joints; ++j)
      for (int a = 0; a < 3; ++a)
        p.theta(a, j) = channels[static_cast<std::size_t>(3 * j + a)].at(t, cfg.frames);
    p.beta = beta;
    p.cam_s = cfg.cam_s_base + cam_s.at(t, cfg.frames);
    p.cam_t.x() = cam_tx.at(t, cfg.frames);
    p.cam_t.y() = cam_ty.at(t, cfg.frames);
    body::FkResult fk = model.forward_kinematics(p);
    seq.params.push_back(std::move(p));
    seq.joints.push_back(std::move(fk.joints));
    seq.vertices.push_back(std::move(fk.vertices));
  }
  return seq;
}

void FeatureGenConfig::validate() const {
  if (feature_dim <= 0) throw std::invalid_argument("FeatureGenConfig: feature_dim <= 0");
  if (noise < 0) throw std::invalid_argument("FeatureGenConfig: noise < 0");
  if (outlier_prob < 0 || outlier_prob > 1)
    throw std::invalid_argument("FeatureGenConfig: outlier_prob outside [0,1]");
  if (outlier_factor < 1)
    throw std::invalid_argument("FeatureGenConfig: outlier_factor < 1");
}

FeatureEncoder FeatureEncoder::create(int param_dim, int feature_dim,
                                      std::uint64_t seed) {
  if (param_dim <= 0 || feature_dim <= 0)
    throw std::invalid_argument("FeatureEncoder: dimensions must be positive");
  std::mt19937_64 rng(seed);
  const int hidden = 2 * feature_dim;
  std::normal_distribution<double> gauss(0.0, 1.0);
  FeatureEncoder e;
  e.w1_.resize(hidden, param_dim);
  e.b1_.resize(hidden);
  e.w2_.resize(feature_dim, hidden);
  e.b2_.resize(feature_dim);
  const double s1 = 1.0 / std::sqrt(static_cast<double>(param_dim));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (Eigen::Index j = 0; j < e.w1_.cols(); ++j)
    for (Eigen::Index i = 0; i < e.w1_.rows(); ++i) e.w1_(i, j) = s1 * gauss(rng);
  for (Eigen::Index i = 0; i < e.b1_.size(); ++i) e.b1_(i) = 0.1 * gauss(rng);
  for (Eigen::Index j = 0; j < e.w2_.cols(); ++j)
    for (Eigen::Index i = 0; i < e.w2_.rows(); ++i) e.w2_(i, j) = s2 * gauss(rng);
  for (Eigen::Index i = 0; i < e.b2_.size(); ++i) e.b2_(i) = 0.1 * gauss(rng);
  return e;
}

FeatureEncoder FeatureEncoder::from_weights(Mat w1, Vec b1, Mat w2, Vec b2) {
  if (w1.rows() != b1.size() || w2.cols() != w1.rows() || w2.rows() != b2.size())
    throw std::invalid_argument("FeatureEncoder: inconsistent weight shapes");
  FeatureEncoder e;
  e.w1_ = std::move(w1);
  e.b1_ = std::move(b1);
  e.w2_ = std::move(w2);
  e.b2_ = std::move(b2);
  return e;
}

Vec FeatureEncoder::encode(const Vec& flat_params) const {
  if (flat_params.size() != w1_.cols())
    throw std::invalid_argument("FeatureEncoder: parameter dim mismatch");
  return w2_ * (w1_ * flat_params + b1_).array().tanh().matrix() + b2_;
}

Mat encode_features(const MotionSequence& motion, const FeatureEncoder& enc,
                    const FeatureGenConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  if (cfg.feature_dim != enc.feature_dim())
    throw std::invalid_argument("encode_features: encoder/config dim mismatch");
  if (cfg.feature_dim < enc.param_dim())
    throw std::invalid_argument(
        "encode_features: feature_dim " + std::to_string(cfg.feature_dim) +
        " is below the parameter dimension " + std::to_string(enc.param_dim()) +
        "; the features would lose pose information");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  Mat out(cfg.feature_dim, motion.frames());
  for (int t = 0; t < motion.frames(); ++t) {
    Vec f = enc.encode(motion.params[static_cast<std::size_t>(t)].flatten());
    const double boost = coin(rng) < cfg.outlier_prob ? cfg.outlier_factor : 1.0;
    for (Eigen::Index i = 0; i < f.size(); ++i)
      f(i) += cfg.noise * boost * gauss(rng);
    out.col(t) = f;
  }
  return out;
}

std::vector<SequenceWindow> make_windows(int frames, int window, int stride,
                                         int sequence_index) {
  if (window < 3) throw std::invalid_argument("make_windows: window < 3");
  if (stride < 1) throw std::invalid_argument("make_windows: stride < 1");
  std::vector<SequenceWindow> out;
  const int current_offset = window / 2 - 1;
  for (int s = 0; s + window <= frames; s += stride)
    out.push_back({sequence_index, s, s + current_offset});
  return out;
}

}  // namespace tempose
