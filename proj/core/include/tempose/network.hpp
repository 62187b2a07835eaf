// SPDX-License-Identifier: Apache-2.0
//
// Full model: temporal encoders + integration head + shared regressor.
// Training produces three parameter estimates per window (past, future,
// integrated); inference produces only the integrated one.

#pragma once

#include "tempose/regressor.hpp"
#include "tempose/temporal.hpp"
#include "tempose/tensor.hpp"

#include <atomic>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace tempose {

struct NetworkConfig {
  TemporalConfig temporal;
  int joints = 24;
  int shape_dim = 10;
  int regressor_iters = 3;
  std::vector<int> regressor_hidden;  // empty selects the regressor default

  RegressorConfig regressor_config() const;
  void validate() const;
};

// One training pass over a batched window. past/future are invalid Vars when
// the forecast branches are off.
struct BranchOutputs {
  Var raw_int;
  Var raw_past;
  Var raw_future;
  TemporalFeatures feats;
};

class Network {
 public:
  Network() = default;
  static Network create(const NetworkConfig& cfg, const Vec& mean_raw,
                        std::uint64_t seed);

  // frames: exactly T entries, feature_dim x batch each.
  BranchOutputs forward(std::span<const Var> frames) const;

  // Inference path: regresses only the integrated feature. Never touches the
  // past/future parameter branches (forecast_regressions() stays put).
  Var forward_current(std::span<const Var> frames) const;

  const NetworkConfig& config() const { return cfg_; }
  const TemporalEncoder& encoder() const { return encoder_; }
  const IntegrationHead& head() const { return head_; }
  const Regressor& regressor() const { return regressor_; }

  // Stable order: encoder, integration head, regressor.
  std::vector<Var> parameters() const;
  std::vector<std::pair<std::string, Var>> named_parameters() const;

  // Number of past/future parameter regressions performed since creation;
  // the evaluation path asserts this never moves.
  std::uint64_t forecast_regressions() const { return branch_count_->load(); }

 private:
  NetworkConfig cfg_;
  TemporalEncoder encoder_;
  IntegrationHead head_;
  Regressor regressor_;
  std::shared_ptr<std::atomic<std::uint64_t>> branch_count_;
};

}  // namespace tempose
