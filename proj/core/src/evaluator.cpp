// SPDX-License-Identifier: Apache-2.0

#include "tempose/evaluator.hpp"

#include "tempose/regressor.hpp"
#include "tempose/serialize.hpp"

#include <algorithm>
#include <stdexcept>

namespace tempose {

void PredictionSet::save(const std::string& path) const {
  nlohmann::json table = nlohmann::json::array();
  std::vector<double> payload;
  const int dim = body::params_dim(joints, shape_dim);
  for (std::size_t k = 0; k < params.size(); ++k) {
    table.push_back({{"id", ids[k]},
                     {"first_frame", first_frame[k]},
                     {"frames", params[k].size()},
                     {"offset", payload.size()}});
    for (const body::BodyParams& p : params[k]) {
      const Vec flat = p.flatten();
      if (flat.size() != dim)
        throw std::invalid_argument("PredictionSet::save: parameter dim mismatch");
      payload.insert(payload.end(), flat.data(), flat.data() + flat.size());
    }
  }
  nlohmann::json header{{"kind", "predictions"}, {"version", 1},
                        {"fps", fps},           {"joints", joints},
                        {"shape_dim", shape_dim}, {"sequences", std::move(table)}};
  io::write_container(path, header, payload);
}

PredictionSet PredictionSet::load(const std::string& path) {
  io::Container c = io::read_container(path);
  const nlohmann::json& h = c.header;
  if (h.value("kind", "") != "predictions")
    throw std::runtime_error(path + ": not a predictions container");
  if (h.at("version").get<int>() != 1)
    throw std::runtime_error(path + ": unsupported predictions version");
  PredictionSet p;
  p.fps = h.at("fps").get<double>();
  p.joints = h.at("joints").get<int>();
  p.shape_dim = h.at("shape_dim").get<int>();
  const int dim = body::params_dim(p.joints, p.shape_dim);
  for (const auto& e : h.at("sequences")) {
    p.ids.push_back(e.at("id").get<std::string>());
    p.first_frame.push_back(e.at("first_frame").get<int>());
    const auto frames = e.at("frames").get<std::size_t>();
    std::size_t off = e.at("offset").get<std::size_t>();
    std::vector<body::BodyParams> seq;
    seq.reserve(frames);
    for (std::size_t t = 0; t < frames; ++t) {
      if (off + static_cast<std::size_t>(dim) > c.payload.size())
        throw std::runtime_error(path + ": frame record out of range");
      Vec flat = Eigen::Map<const Vec>(c.payload.data() + off, dim);
      seq.push_back(body::BodyParams::unflatten(flat, p.joints, p.shape_dim));
      off += static_cast<std::size_t>(dim);
    }
    p.params.push_back(std::move(seq));
  }
  return p;
}

namespace {

std::size_t split_limit(const std::vector<SequenceData>& split, int max_sequences) {
  return max_sequences > 0
             ? std::min<std::size_t>(split.size(), static_cast<std::size_t>(max_sequences))
             : split.size();
}

}  // namespace

PredictionSet predict(const Network& net, const Dataset& data,
                      const std::vector<SequenceData>& split,
                      const EvalOptions& opt) {
  if (opt.batch_size < 1) throw std::invalid_argument("predict: batch_size < 1");
  if (net.config().temporal.feature_dim != data.feature_dim())
    throw std::invalid_argument("predict: network feature dim " +
                                std::to_string(net.config().temporal.feature_dim) +
                                " != dataset " + std::to_string(data.feature_dim()));
  if (net.config().joints != data.model().joint_count() ||
      net.config().shape_dim != data.model().shape_dim())
    throw std::invalid_argument("predict: body dimensions disagree with dataset");

  const std::uint64_t branches_before = net.forecast_regressions();
  const TemporalConfig& tc = net.config().temporal;
  const int T = tc.window;
  const int J = net.config().joints;
  const int B = net.config().shape_dim;

  PredictionSet out;
  out.fps = data.fps();
  out.joints = J;
  out.shape_dim = B;

  const std::size_t n = split_limit(split, opt.max_sequences);
  for (std::size_t k = 0; k < n; ++k) {
    const SequenceData& s = split[k];
    auto wins = make_windows(s.motion.frames(), T, 1, static_cast<int>(k));
    std::vector<body::BodyParams> seq_preds;
    seq_preds.reserve(wins.size());
    for (std::size_t w0 = 0; w0 < wins.size();
         w0 += static_cast<std::size_t>(opt.batch_size)) {
      const std::size_t wb =
          std::min(wins.size(), w0 + static_cast<std::size_t>(opt.batch_size));
      const Eigen::Index bsz = static_cast<Eigen::Index>(wb - w0);
      Tape tape;  // owns the forward graph; torn down iteratively
      std::vector<Var> frames;
      frames.reserve(static_cast<std::size_t>(T));
      for (int t = 0; t < T; ++t) {
        Mat f(data.feature_dim(), bsz);
        for (std::size_t w = w0; w < wb; ++w)
          f.col(static_cast<Eigen::Index>(w - w0)) =
              s.features.col(wins[w].start + t);
        frames.push_back(Var::constant(f));
      }
      Var raw = net.forward_current(frames);
      for (Eigen::Index col = 0; col < bsz; ++col)
        seq_preds.push_back(decode_raw(raw.value().col(col), J, B));
    }
    out.ids.push_back(s.motion.id);
    out.first_frame.push_back(wins.empty() ? 0 : wins.front().current);
    out.params.push_back(std::move(seq_preds));
  }
  if (net.forecast_regressions() != branches_before)
    throw std::logic_error("predict: past/future parameter branches ran during evaluation");
  return out;
}

PredictionSet oracle_predictions(const Dataset& data,
                                 const std::vector<SequenceData>& split,
                                 int window, const EvalOptions& opt) {
  PredictionSet out;
  out.fps = data.fps();
  out.joints = data.model().joint_count();
  out.shape_dim = data.model().shape_dim();
  const std::size_t n = split_limit(split, opt.max_sequences);
  for (std::size_t k = 0; k < n; ++k) {
    const SequenceData& s = split[k];
    auto wins = make_windows(s.motion.frames(), window, 1, static_cast<int>(k));
    std::vector<body::BodyParams> seq;
    for (const SequenceWindow& w : wins)
      seq.push_back(s.motion.params[static_cast<std::size_t>(w.current)]);
    out.ids.push_back(s.motion.id);
    out.first_frame.push_back(wins.empty() ? 0 : wins.front().current);
    out.params.push_back(std::move(seq));
  }
  return out;
}

EvalOutput score(const PredictionSet& preds, const Dataset& data,
                 const std::vector<SequenceData>& split) {
  const body::BodyModel& model = data.model();
  if (preds.joints != model.joint_count() || preds.shape_dim != model.shape_dim())
    throw std::invalid_argument("score: prediction dims disagree with dataset");
  if (preds.params.size() > split.size())
    throw std::invalid_argument("score: more prediction sequences than split");

  EvalOutput out;
  for (std::size_t k = 0; k < preds.params.size(); ++k) {
    const SequenceData& s = split[k];
    if (preds.ids[k] != s.motion.id)
      throw std::invalid_argument("score: sequence id mismatch at index " +
                                  std::to_string(k) + ": " + preds.ids[k] +
                                  " vs " + s.motion.id);
    const int first = preds.first_frame[k];
    const auto frames = preds.params[k].size();
    if (first < 0 ||
        first + static_cast<int>(frames) > s.motion.frames())
      throw std::invalid_argument("score: scored range exceeds sequence length");
    if (frames < 3)
      throw std::invalid_argument("score: need >= 3 scored frames per sequence");

    std::vector<Mat> pred_joints(frames), gt_joints(frames);
    SequenceMetrics row;
    row.id = s.motion.id;
    row.frames = static_cast<long>(frames);
    double mpjpe_acc = 0, pa_acc = 0, mpvpe_acc = 0;
    for (std::size_t i = 0; i < frames; ++i) {
      const body::BodyParams& p = preds.params[k][i];
      const std::size_t t = static_cast<std::size_t>(first) + i;
      body::FkResult fk = model.forward_kinematics(p);
      pred_joints[i] = fk.joints;
      gt_joints[i] = s.motion.joints[t];
      mpjpe_acc += mpjpe_mm(fk.joints, gt_joints[i], model.eval_joints());
      pa_acc += pa_mpjpe_mm(fk.joints, gt_joints[i], model.eval_joints());
      mpvpe_acc += mpvpe_mm(fk.vertices, s.motion.vertices[t],
                            fk.joints.col(0), gt_joints[i].col(0));
    }
    const double n = static_cast<double>(frames);
    row.mpjpe_mm = mpjpe_acc / n;
    row.pa_mpjpe_mm = pa_acc / n;
    row.mpvpe_mm = mpvpe_acc / n;
    AccelError ae =
        accel_error(pred_joints, gt_joints, data.fps(), model.eval_joints());
    row.accel_err_mm_s2 = ae.mm_per_s2;
    row.accel_err_mm_frame2 = ae.mm_per_frame2;
    out.rows.push_back(row);
    out.accel_traces.push_back(std::move(ae.per_frame_mm_frame2));
  }
  out.report = aggregate(out.rows, data.fps());
  out.report.validate();
  return out;
}

EvalOutput evaluate(const Network& net, const Dataset& data,
                    const std::vector<SequenceData>& split,
                    const EvalOptions& opt) {
  return score(predict(net, data, split, opt), data, split);
}

}  // namespace tempose
