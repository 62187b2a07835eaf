// SPDX-License-Identifier: Apache-2.0

#include "tempose/trainer.hpp"

#include "tempose/evaluator.hpp"
#include "tempose/serialize.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace tempose {

void Checkpoint::save(const std::string& path) const {
  std::vector<io::TensorRecord> tensors;
  tensors.push_back({"mean_raw", Mat(mean_raw)});
  for (std::size_t i = 0; i < weights.size(); ++i)
    tensors.push_back({"w" + std::to_string(i), weights[i]});
  nlohmann::json steps = nlohmann::json::array();
  for (std::size_t i = 0; i < optimizer.size(); ++i) {
    tensors.push_back({"m" + std::to_string(i), optimizer[i].m});
    tensors.push_back({"v" + std::to_string(i), optimizer[i].v});
    steps.push_back(optimizer[i].step_count);
  }
  nlohmann::json meta{{"kind", "checkpoint"},
                      {"version", 1},
                      {"config", config.to_json()},
                      {"epoch", epoch},
                      {"best_val_pa_mpjpe", best_val_pa_mpjpe},
                      {"learning_rate", learning_rate},
                      {"weight_count", weights.size()},
                      {"optimizer_steps", std::move(steps)}};
  io::write_tensors(path, std::move(meta), tensors);
}

Checkpoint Checkpoint::load(const std::string& path) {
  auto [meta, tensors] = io::read_tensors(path);
  if (meta.value("kind", "") != "checkpoint")
    throw std::runtime_error(path + ": not a checkpoint container");
  if (meta.at("version").get<int>() != 1)
    throw std::runtime_error(path + ": unsupported checkpoint version");
  Checkpoint c;
  c.config = RunConfig::from_json(meta.at("config"));
  c.epoch = meta.at("epoch").get<int>();
  c.best_val_pa_mpjpe = meta.at("best_val_pa_mpjpe").get<double>();
  c.learning_rate = meta.at("learning_rate").get<double>();
  const auto weight_count = meta.at("weight_count").get<std::size_t>();
  auto find = [&](const std::string& name) -> const Mat& {
    for (const auto& t : tensors)
      if (t.name == name) return t.value;
    throw std::runtime_error(path + ": missing tensor " + name);
  };
  c.mean_raw = find("mean_raw").col(0);
  for (std::size_t i = 0; i < weight_count; ++i)
    c.weights.push_back(find("w" + std::to_string(i)));
  const auto& steps = meta.at("optimizer_steps");
  for (std::size_t i = 0; i < steps.size(); ++i) {
    AdamState s;
    s.m = find("m" + std::to_string(i));
    s.v = find("v" + std::to_string(i));
    s.step_count = steps[static_cast<int>(i)].get<long>();
    s.beta1 = c.config.optimizer.beta1;
    s.beta2 = c.config.optimizer.beta2;
    s.epsilon = c.config.optimizer.epsilon;
    s.learning_rate = c.learning_rate;
    c.optimizer.push_back(std::move(s));
  }
  return c;
}

Network Checkpoint::instantiate() const {
  Network net = Network::create(config.network, mean_raw, config.seed);
  std::vector<Var> params = net.parameters();
  if (params.size() != weights.size())
    throw std::runtime_error("checkpoint: weight count disagrees with architecture");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].rows() != weights[i].rows() || params[i].cols() != weights[i].cols())
      throw std::runtime_error("checkpoint: weight shape mismatch at index " +
                               std::to_string(i));
    params[i].mutable_value() = weights[i];
  }
  return net;
}

namespace {

std::vector<Mat> snapshot(const std::vector<Var>& params) {
  std::vector<Mat> out;
  out.reserve(params.size());
  for (const Var& p : params) out.push_back(p.value());
  return out;
}

double validate_pa(const Network& net, const Dataset& data, int val_sequences,
                   double* accel_out) {
  EvalOptions opt;
  opt.max_sequences = val_sequences;
  EvalOutput ev = evaluate(net, data, data.eval_split(), opt);
  if (accel_out != nullptr) *accel_out = ev.report.accel_err_mm_s2;
  return ev.report.pa_mpjpe_mm;
}

}  // namespace

TrainResult train(const RunConfig& cfg, const Dataset& data) {
  cfg.validate();
  const TemporalConfig& tc = cfg.network.temporal;
  if (cfg.loss.supervision_target == SupervisionTarget::adjacent && tc.window < 4)
    throw std::invalid_argument("train: adjacent supervision needs window >= 4");
  if (data.feature_dim() != tc.feature_dim)
    throw std::invalid_argument("train: dataset feature dim mismatch");

  std::vector<SequenceData> const& full_train = data.train();
  const std::size_t use_n =
      cfg.max_train_sequences > 0
          ? std::min<std::size_t>(full_train.size(),
                                  static_cast<std::size_t>(cfg.max_train_sequences))
          : full_train.size();
  std::vector<SequenceData> train_split(full_train.begin(),
                                        full_train.begin() + static_cast<long>(use_n));
  std::vector<SequenceWindow> windows =
      data.windows(train_split, tc.window, cfg.train_stride);
  if (windows.empty()) throw std::invalid_argument("train: no training windows");

  Network net = Network::create(cfg.network, data.mean_raw(), cfg.seed);
  std::vector<Var> params = net.parameters();
  AdamOptimizer opt(params, cfg.optimizer.learning_rate);
  for (AdamState& s : opt.states()) {
    s.beta1 = cfg.optimizer.beta1;
    s.beta2 = cfg.optimizer.beta2;
    s.epsilon = cfg.optimizer.epsilon;
  }

  TrainResult result;
  result.best.config = cfg;
  result.best.mean_raw = data.mean_raw();

  PlateauSchedule schedule{cfg.schedule};
  double val_accel = 0;
  const double baseline = validate_pa(net, data, cfg.val_sequences, &val_accel);
  schedule.initialize(baseline);
  result.best.best_val_pa_mpjpe = baseline;
  result.best.epoch = 0;
  result.best.learning_rate = opt.learning_rate();
  result.best.weights = snapshot(params);
  result.best.optimizer = opt.states();
  TrainLogEntry base_entry;
  base_entry.epoch = 0;
  base_entry.val_pa_mpjpe = baseline;
  base_entry.val_accel_mm_s2 = val_accel;
  base_entry.learning_rate = opt.learning_rate();
  result.log.push_back(base_entry);

  const int current_offset = tc.current_index();
  std::mt19937_64 shuffle_rng(derive_seed(cfg.seed, 0xe9ull));

  int consecutive_bad = 0;
  for (int epoch = 1; epoch <= cfg.optimizer.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    std::shuffle(windows.begin(), windows.end(), shuffle_rng);

    TrainLogEntry entry;
    entry.epoch = epoch;
    double loss_sum = 0;
    long batch_count = 0;
    const std::size_t bsz = static_cast<std::size_t>(cfg.optimizer.batch_size);
    for (std::size_t w0 = 0; w0 < windows.size(); w0 += bsz) {
      const std::size_t wb = std::min(windows.size(), w0 + bsz);
      const Eigen::Index batch = static_cast<Eigen::Index>(wb - w0);
      Tape tape;
      std::vector<Var> frames;
      frames.reserve(static_cast<std::size_t>(tc.window));
      for (int t = 0; t < tc.window; ++t) {
        Mat f(data.feature_dim(), batch);
        for (std::size_t w = w0; w < wb; ++w) {
          const SequenceWindow& win = windows[w];
          f.col(static_cast<Eigen::Index>(w - w0)) =
              train_split[static_cast<std::size_t>(win.sequence)].features.col(
                  win.start + t);
        }
        frames.push_back(Var::constant(f));
      }
      BranchOutputs outs = net.forward(frames);

      Var total;
      LossBreakdown bd;
      for (std::size_t w = w0; w < wb; ++w) {
        const SequenceWindow& win = windows[w];
        const auto& seq = train_split[static_cast<std::size_t>(win.sequence)];
        const std::size_t c = static_cast<std::size_t>(win.start + current_offset);
        WindowGroundTruth gt;
        gt.current = seq.motion.params[c];
        if (cfg.loss.supervision_target == SupervisionTarget::adjacent) {
          gt.past_adjacent = seq.motion.params[c - 1];
          gt.future_adjacent = seq.motion.params[c + 1];
        }
        Var wl = window_loss(outs, static_cast<Eigen::Index>(w - w0), data.model(),
                             gt, cfg.loss, &bd);
        total = total.valid() ? total + wl : wl;
      }
      total = cmul(total, 1.0 / static_cast<double>(batch));

      const double loss_value = total.scalar_value();
      if (!std::isfinite(loss_value)) {
        entry.skipped_batches += 1;
        if (++consecutive_bad >= 3)
          throw std::runtime_error(
              "train: three consecutive non-finite batches, aborting");
        continue;
      }
      consecutive_bad = 0;
      opt.zero_grad();
      tape.backward(total);
      opt.step();
      loss_sum += loss_value;
      bd.pose /= static_cast<double>(batch);
      bd.shape /= static_cast<double>(batch);
      bd.j3d /= static_cast<double>(batch);
      bd.j2d /= static_cast<double>(batch);
      bd.total /= static_cast<double>(batch);
      entry.mean_terms += bd;
      ++batch_count;
    }
    if (batch_count > 0) {
      entry.mean_loss = loss_sum / static_cast<double>(batch_count);
      const double inv = 1.0 / static_cast<double>(batch_count);
      entry.mean_terms.pose *= inv;
      entry.mean_terms.shape *= inv;
      entry.mean_terms.j3d *= inv;
      entry.mean_terms.j2d *= inv;
      entry.mean_terms.total *= inv;
    }

    entry.val_pa_mpjpe = validate_pa(net, data, cfg.val_sequences, &entry.val_accel_mm_s2);
    if (entry.val_pa_mpjpe < result.best.best_val_pa_mpjpe) {
      result.best.best_val_pa_mpjpe = entry.val_pa_mpjpe;
      result.best.epoch = epoch;
      result.best.learning_rate = opt.learning_rate();
      result.best.weights = snapshot(params);
      result.best.optimizer = opt.states();
    }
    if (schedule.observe(entry.val_pa_mpjpe))
      opt.set_learning_rate(opt.learning_rate() * cfg.schedule.factor);
    entry.learning_rate = opt.learning_rate();
    entry.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.log.push_back(entry);
  }
  return result;
}

std::string format_log(const std::vector<TrainLogEntry>& log) {
  std::ostringstream os;
  os.precision(6);
  os << "epoch\tmean_loss\tpose\tshape\tj3d\tj2d\tval_pa_mpjpe\tval_accel_mm_s2"
        "\tlr\tskipped\tseconds\n";
  for (const TrainLogEntry& e : log)
    os << e.epoch << "\t" << e.mean_loss << "\t" << e.mean_terms.pose << "\t"
       << e.mean_terms.shape << "\t" << e.mean_terms.j3d << "\t" << e.mean_terms.j2d
       << "\t" << e.val_pa_mpjpe << "\t" << e.val_accel_mm_s2 << "\t"
       << e.learning_rate << "\t" << e.skipped_batches << "\t" << e.seconds << "\n";
  return os.str();
}

}  // namespace tempose
