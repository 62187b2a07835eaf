// SPDX-License-Identifier: Apache-2.0
//
// Whole-run configuration: model dimensions, loss weights, optimizer and
// learning-rate schedule, plus data-loading knobs. Serialized as JSON and
// echoed into every run manifest so results stay reproducible.

#pragma once

#include "tempose/loss.hpp"
#include "tempose/network.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>

namespace tempose {

struct OptimizerConfig {
  double learning_rate = 1e-3;
  int batch_size = 32;
  int epochs = 10;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

// Plateau schedule: the learning rate is divided when the validation metric
// has not improved for `patience` consecutive epochs.
struct ScheduleConfig {
  int patience = 5;
  double factor = 0.1;
  double min_delta = 1e-9;  // required improvement, mm

  void validate() const;
};

struct RunConfig {
  NetworkConfig network;
  LossWeights loss;
  OptimizerConfig optimizer;
  ScheduleConfig schedule;

  int train_stride = 1;         // window stride over training sequences
  int max_train_sequences = 0;  // 0 = use the whole split
  int val_sequences = 8;        // eval-split prefix used for the schedule
  std::uint64_t seed = 0;

  void validate() const;
  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::string& path);
  void save(const std::string& path) const;

  static RunConfig desk();  // defaults sized for minutes-scale CPU training
};

// Writes a manifest JSON next to run outputs: config echo plus free-form
// entries (seed, dataset path, command line).
void write_manifest(const std::string& path, const RunConfig& config,
                    const nlohmann::json& extra);

}  // namespace tempose
