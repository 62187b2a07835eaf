// SPDX-License-Identifier: Apache-2.0
//
// Inference and scoring. Prediction slides a stride-1 window over each
// sequence and keeps the current-frame estimate; frames without full window
// context are skipped and counted. Scoring compares predictions against the
// dataset's ground truth with the standard metric set.

#pragma once

#include "tempose/dataset.hpp"
#include "tempose/metrics.hpp"
#include "tempose/network.hpp"

#include <string>
#include <vector>

namespace tempose {

struct EvalOptions {
  int batch_size = 64;     // windows per forward pass
  int max_sequences = 0;   // 0 = whole split
};

// Per-sequence body-parameter estimates for the scored frame range
// [first_frame, first_frame + params.size()).
struct PredictionSet {
  double fps = 0;
  int joints = 0;
  int shape_dim = 0;
  std::vector<std::string> ids;
  std::vector<int> first_frame;
  std::vector<std::vector<body::BodyParams>> params;

  void save(const std::string& path) const;
  static PredictionSet load(const std::string& path);
};

// Runs the network over a split. Only the integrated branch is evaluated;
// the call fails if the past/future parameter counters move.
PredictionSet predict(const Network& net, const Dataset& data,
                      const std::vector<SequenceData>& split,
                      const EvalOptions& opt = {});

// Ground truth copied into prediction form (the all-zero-error oracle).
PredictionSet oracle_predictions(const Dataset& data,
                                 const std::vector<SequenceData>& split,
                                 int window, const EvalOptions& opt = {});

struct EvalOutput {
  MetricReport report;
  std::vector<SequenceMetrics> rows;
  // |a_pred - a_gt| per interior scored frame, mm/frame^2, per sequence.
  std::vector<std::vector<double>> accel_traces;
};

// Scores predictions against the split they were produced from.
EvalOutput score(const PredictionSet& preds, const Dataset& data,
                 const std::vector<SequenceData>& split);

// predict + score in one call.
EvalOutput evaluate(const Network& net, const Dataset& data,
                    const std::vector<SequenceData>& split,
                    const EvalOptions& opt = {});

}  // namespace tempose
