// SPDX-License-Identifier: Apache-2.0

#include "tempose/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tempose {

void OptimizerConfig::validate() const {
  if (learning_rate < 0) throw std::invalid_argument("optimizer: negative learning rate");
  if (batch_size < 1) throw std::invalid_argument("optimizer: batch_size < 1");
  if (epochs < 0) throw std::invalid_argument("optimizer: epochs < 0");
  if (beta1 < 0 || beta1 >= 1 || beta2 < 0 || beta2 >= 1 || epsilon <= 0)
    throw std::invalid_argument("optimizer: moment parameters out of range");
}

void ScheduleConfig::validate() const {
  if (patience < 1) throw std::invalid_argument("schedule: patience < 1");
  if (factor <= 0 || factor >= 1)
    throw std::invalid_argument("schedule: factor must be in (0, 1)");
  if (min_delta < 0) throw std::invalid_argument("schedule: min_delta < 0");
}

void RunConfig::validate() const {
  network.validate();
  loss.validate();
  optimizer.validate();
  schedule.validate();
  if (train_stride < 1) throw std::invalid_argument("RunConfig: train_stride < 1");
  if (max_train_sequences < 0)
    throw std::invalid_argument("RunConfig: max_train_sequences < 0");
  if (val_sequences < 1) throw std::invalid_argument("RunConfig: val_sequences < 1");
}

nlohmann::json RunConfig::to_json() const {
  const TemporalConfig& t = network.temporal;
  return nlohmann::json{
      {"network",
       {{"window", t.window},
        {"feature_dim", t.feature_dim},
        {"gru_hidden", t.gru_hidden},
        {"forecast_hidden", t.forecast_hidden},
        {"bottleneck", t.bottleneck},
        {"attention_hidden", t.attention_hidden},
        {"use_residual", t.use_residual},
        {"poseforecast_enabled", t.poseforecast_enabled},
        {"poseforecast_includes_current", t.poseforecast_includes_current},
        {"joints", network.joints},
        {"shape_dim", network.shape_dim},
        {"regressor_iters", network.regressor_iters},
        {"regressor_hidden", network.regressor_hidden}}},
      {"loss",
       {{"pose", loss.pose},
        {"shape", loss.shape},
        {"j3d", loss.j3d},
        {"j2d", loss.j2d},
        {"supervision_target", to_string(loss.supervision_target)}}},
      {"optimizer",
       {{"learning_rate", optimizer.learning_rate},
        {"batch_size", optimizer.batch_size},
        {"epochs", optimizer.epochs},
        {"beta1", optimizer.beta1},
        {"beta2", optimizer.beta2},
        {"epsilon", optimizer.epsilon}}},
      {"schedule",
       {{"patience", schedule.patience},
        {"factor", schedule.factor},
        {"min_delta", schedule.min_delta}}},
      {"train_stride", train_stride},
      {"max_train_sequences", max_train_sequences},
      {"val_sequences", val_sequences},
      {"seed", seed}};
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  RunConfig c;
  const auto& n = j.at("network");
  TemporalConfig& t = c.network.temporal;
  t.window = n.at("window").get<int>();
  t.feature_dim = n.at("feature_dim").get<int>();
  t.gru_hidden = n.at("gru_hidden").get<int>();
  t.forecast_hidden = n.at("forecast_hidden").get<int>();
  t.bottleneck = n.at("bottleneck").get<int>();
  t.attention_hidden = n.at("attention_hidden").get<std::vector<int>>();
  t.use_residual = n.at("use_residual").get<bool>();
  t.poseforecast_enabled = n.at("poseforecast_enabled").get<bool>();
  t.poseforecast_includes_current =
      n.at("poseforecast_includes_current").get<bool>();
  c.network.joints = n.at("joints").get<int>();
  c.network.shape_dim = n.at("shape_dim").get<int>();
  c.network.regressor_iters = n.at("regressor_iters").get<int>();
  c.network.regressor_hidden = n.at("regressor_hidden").get<std::vector<int>>();
  const auto& l = j.at("loss");
  c.loss.pose = l.at("pose").get<double>();
  c.loss.shape = l.at("shape").get<double>();
  c.loss.j3d = l.at("j3d").get<double>();
  c.loss.j2d = l.at("j2d").get<double>();
  c.loss.supervision_target =
      supervision_target_from_string(l.at("supervision_target").get<std::string>());
  const auto& o = j.at("optimizer");
  c.optimizer.learning_rate = o.at("learning_rate").get<double>();
  c.optimizer.batch_size = o.at("batch_size").get<int>();
  c.optimizer.epochs = o.at("epochs").get<int>();
  c.optimizer.beta1 = o.at("beta1").get<double>();
  c.optimizer.beta2 = o.at("beta2").get<double>();
  c.optimizer.epsilon = o.at("epsilon").get<double>();
  const auto& s = j.at("schedule");
  c.schedule.patience = s.at("patience").get<int>();
  c.schedule.factor = s.at("factor").get<double>();
  c.schedule.min_delta = s.at("min_delta").get<double>();
  c.train_stride = j.at("train_stride").get<int>();
  c.max_train_sequences = j.at("max_train_sequences").get<int>();
  c.val_sequences = j.at("val_sequences").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  RunConfig c = from_json(nlohmann::json::parse(ss.str()));
  c.validate();
  return c;
}

void RunConfig::save(const std::string& path) const {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write config: " + path);
  f << to_json().dump(2) << "\n";
}

RunConfig RunConfig::desk() { return RunConfig{}; }

void write_manifest(const std::string& path, const RunConfig& config,
                    const nlohmann::json& extra) {
  nlohmann::json m{{"config", config.to_json()}};
  for (auto it = extra.begin(); it != extra.end(); ++it) m[it.key()] = it.value();
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write manifest: " + path);
  f << m.dump(2) << "\n";
}

}  // namespace tempose
