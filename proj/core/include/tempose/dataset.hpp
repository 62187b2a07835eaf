// SPDX-License-Identifier: Apache-2.0
//
// Generated train/eval corpus bundled with everything needed to reproduce and
// evaluate it: the body model, the frozen feature encoder, per-frame ground
// truth, features, and the train-set mean parameter vector.

#pragma once

#include "tempose/body_model.hpp"
#include "tempose/synth.hpp"
#include "tempose/tensor.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace tempose {

struct DatasetConfig {
  MotionGenConfig motion;
  FeatureGenConfig feature;
  int train_sequences = 200;
  int eval_sequences = 40;

  void validate() const;
  nlohmann::json to_json() const;
  static DatasetConfig from_json(const nlohmann::json& j);
};

struct SequenceData {
  MotionSequence motion;
  Mat features;  // feature_dim x frames
};

class Dataset {
 public:
  static Dataset generate(const body::BodyModel& model, const DatasetConfig& cfg,
                          std::uint64_t master_seed);

  void save(const std::string& path) const;
  static Dataset load(const std::string& path);

  const body::BodyModel& model() const { return model_; }
  const DatasetConfig& config() const { return cfg_; }
  std::uint64_t master_seed() const { return master_seed_; }
  double fps() const { return cfg_.motion.fps; }
  int feature_dim() const { return cfg_.feature.feature_dim; }

  const std::vector<SequenceData>& train() const { return train_; }
  const std::vector<SequenceData>& eval_split() const { return eval_; }

  // Mean of the 6D-encoded parameter vectors over all training frames; the
  // regressor's initial estimate.
  const Vec& mean_raw() const { return mean_raw_; }
  const FeatureEncoder& encoder() const { return encoder_; }

  // Sliding windows over every sequence of a split.
  std::vector<SequenceWindow> windows(const std::vector<SequenceData>& split,
                                      int window, int stride) const;

 private:
  explicit Dataset(body::BodyModel model) : model_(std::move(model)) {}

  body::BodyModel model_;
  DatasetConfig cfg_;
  std::uint64_t master_seed_ = 0;
  FeatureEncoder encoder_;
  std::vector<SequenceData> train_, eval_;
  Vec mean_raw_;
};

}  // namespace tempose
