// SPDX-License-Identifier: Apache-2.0
//
// Architecture comparison: trains configuration variants over a fixed seed
// list and tabulates PA-MPJPE and acceleration error (mean and sd across
// seeds). A failing run marks its variant as failed without stopping the
// remaining grid.

#pragma once

#include "tempose/config.hpp"
#include "tempose/dataset.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace tempose {

struct AblationVariant {
  std::string name;
  bool use_residual = false;
  bool poseforecast = true;
  bool includes_current = false;
  SupervisionTarget supervision = SupervisionTarget::current;

  RunConfig apply(RunConfig base) const;
};

// The architecture grid: forecast/no-forecast crossed with the residual
// connection, plus the forecast-sees-current variant.
std::vector<AblationVariant> core_variants();
// Supervision-target variants of the full architecture.
std::vector<AblationVariant> supervision_variants();

struct VariantResult {
  std::string name;
  std::vector<double> pa_mpjpe_mm;       // per seed
  std::vector<double> accel_err_mm_s2;   // per seed
  std::vector<double> mpjpe_mm;
  bool failed = false;
  std::string error;

  double mean_pa() const;
  double sd_pa() const;
  double mean_accel() const;
  double sd_accel() const;
};

struct AblationResult {
  std::vector<std::uint64_t> seeds;
  std::vector<VariantResult> rows;

  const VariantResult* find(const std::string& name) const;
  std::string to_table() const;
  nlohmann::json to_json() const;
};

// Trains every (variant, seed) pair and evaluates on the eval split.
// parallel > 1 runs that many worker threads over the pairs.
AblationResult ablate(const RunConfig& base, const Dataset& data,
                      const std::vector<std::uint64_t>& seeds,
                      const std::vector<AblationVariant>& variants,
                      int parallel = 1,
                      const std::function<void(const std::string&)>& progress = {});

}  // namespace tempose
