// SPDX-License-Identifier: Apache-2.0
//
// Training loop: batched window losses, Adam updates, plateau learning-rate
// schedule driven by validation PA-MPJPE, best-checkpoint retention. Fully
// deterministic for a fixed (config, dataset, seed).

#pragma once

#include "tempose/adam.hpp"
#include "tempose/config.hpp"
#include "tempose/dataset.hpp"
#include "tempose/loss.hpp"
#include "tempose/network.hpp"

#include <limits>
#include <string>
#include <vector>

namespace tempose {

// Drops the learning rate by `factor` after `patience` consecutive epochs
// without improvement. initialize() seeds the best value (typically from a
// pre-training validation pass) without consuming patience.
struct PlateauSchedule {
  ScheduleConfig cfg;
  double best = std::numeric_limits<double>::infinity();
  int stall = 0;

  void initialize(double value) {
    best = value;
    stall = 0;
  }
  // Returns true when the caller should apply one drop now.
  bool observe(double value) {
    if (value < best - cfg.min_delta) {
      best = value;
      stall = 0;
      return false;
    }
    if (++stall >= cfg.patience) {
      stall = 0;
      return true;
    }
    return false;
  }
};

struct Checkpoint {
  RunConfig config;
  Vec mean_raw;
  int epoch = 0;
  double best_val_pa_mpjpe = std::numeric_limits<double>::infinity();
  double learning_rate = 0;
  std::vector<Mat> weights;     // network parameters, canonical order
  std::vector<AdamState> optimizer;  // empty when not saved with state

  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);

  // Builds the network and installs these weights.
  Network instantiate() const;
};

struct TrainLogEntry {
  int epoch = 0;  // 0 is the pre-training validation pass
  double mean_loss = 0;
  LossBreakdown mean_terms;
  double val_pa_mpjpe = 0;
  double val_accel_mm_s2 = 0;
  double learning_rate = 0;
  int skipped_batches = 0;
  double seconds = 0;
};

struct TrainResult {
  Checkpoint best;
  std::vector<TrainLogEntry> log;
};

// Trains per the config on the dataset's train split. Throws
// std::runtime_error after three consecutive non-finite batches.
TrainResult train(const RunConfig& cfg, const Dataset& data);

std::string format_log(const std::vector<TrainLogEntry>& log);

}  // namespace tempose
