// SPDX-License-Identifier: Apache-2.0

#include "tempose/network.hpp"

#include <random>
#include <stdexcept>

namespace tempose {

RegressorConfig NetworkConfig::regressor_config() const {
  RegressorConfig rc;
  rc.feature_dim = temporal.feature_dim;
  rc.joints = joints;
  rc.shape_dim = shape_dim;
  rc.n_iter = regressor_iters;
  rc.hidden = regressor_hidden;
  return rc;
}

void NetworkConfig::validate() const {
  temporal.validate();
  regressor_config().validate();
}

Network Network::create(const NetworkConfig& cfg, const Vec& mean_raw,
                        std::uint64_t seed) {
  cfg.validate();
  std::mt19937_64 rng(seed);
  Network n;
  n.cfg_ = cfg;
  n.encoder_ = TemporalEncoder::create(cfg.temporal, rng);
  if (cfg.temporal.poseforecast_enabled)
    n.head_ = IntegrationHead::create(cfg.temporal, rng);
  n.regressor_ = Regressor::create(cfg.regressor_config(), mean_raw, rng);
  n.branch_count_ = std::make_shared<std::atomic<std::uint64_t>>(0);
  return n;
}

BranchOutputs Network::forward(std::span<const Var> frames) const {
  BranchOutputs out;
  TemporalEncoder::Outputs enc = encoder_.encode_window(frames);
  if (!cfg_.temporal.poseforecast_enabled) {
    out.feats.g_all = enc.all;
    out.feats.g_int = enc.all;
    out.raw_int = regressor_.regress(enc.all);
    return out;
  }
  out.feats = head_.integrate(enc.all, enc.past, enc.future);
  out.raw_int = regressor_.regress(out.feats.g_int);
  out.raw_past = regressor_.regress(out.feats.gp_past);
  out.raw_future = regressor_.regress(out.feats.gp_future);
  branch_count_->fetch_add(2);
  return out;
}

Var Network::forward_current(std::span<const Var> frames) const {
  TemporalEncoder::Outputs enc = encoder_.encode_window(frames);
  if (!cfg_.temporal.poseforecast_enabled) return regressor_.regress(enc.all);
  TemporalFeatures f = head_.integrate(enc.all, enc.past, enc.future);
  return regressor_.regress(f.g_int);
}

std::vector<Var> Network::parameters() const {
  std::vector<Var> out;
  encoder_.collect_params(out);
  if (cfg_.temporal.poseforecast_enabled) head_.collect_params(out);
  regressor_.collect_params(out);
  return out;
}

std::vector<std::pair<std::string, Var>> Network::named_parameters() const {
  std::vector<Var> flat = parameters();
  std::vector<std::pair<std::string, Var>> named;
  named.reserve(flat.size());
  for (std::size_t i = 0; i < flat.size(); ++i)
    named.emplace_back("param_" + std::to_string(i), flat[i]);
  return named;
}

}  // namespace tempose
