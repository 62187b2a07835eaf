// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tempose/evaluator.hpp"
#include "support.hpp"

#include <filesystem>
#include <random>
#include <unistd.h>

using namespace tempose;
using test_support::chain_model;

namespace {

constexpr int kJoints = 5;
constexpr int kShape = 2;
constexpr int kFeature = 24;
constexpr int kFrames = 26;

Dataset tiny_dataset() {
  std::mt19937_64 rng(131);
  body::BodyModel model = chain_model(rng, kJoints, kShape, 4);
  DatasetConfig cfg;
  cfg.motion.frames = kFrames;
  cfg.motion.fps = 25.0;
  cfg.feature.feature_dim = kFeature;
  cfg.train_sequences = 2;
  cfg.eval_sequences = 3;
  return Dataset::generate(model, cfg, 48);
}

NetworkConfig tiny_net_cfg() {
  NetworkConfig cfg;
  cfg.temporal.window = 8;
  cfg.temporal.feature_dim = kFeature;
  cfg.temporal.gru_hidden = 12;
  cfg.temporal.forecast_hidden = 8;
  cfg.temporal.bottleneck = 4;
  cfg.temporal.attention_hidden = {5};
  cfg.joints = kJoints;
  cfg.shape_dim = kShape;
  cfg.regressor_iters = 1;
  cfg.regressor_hidden = {16};
  return cfg;
}

std::filesystem::path temp_file(const char* stem) {
  return std::filesystem::temp_directory_path() /
         (std::string(stem) + "-" + std::to_string(::getpid()) + ".bin");
}

struct FileGuard {
  std::filesystem::path path;
  ~FileGuard() { std::filesystem::remove(path); }
};

}  // namespace

TEST_CASE("ground-truth predictions score zero on every metric") {
  Dataset data = tiny_dataset();
  const int window = 8;
  PredictionSet oracle = oracle_predictions(data, data.eval_split(), window);
  EvalOutput out = score(oracle, data, data.eval_split());
  CHECK(out.report.mpjpe_mm < 1e-9);
  CHECK(out.report.pa_mpjpe_mm < 1e-9);
  CHECK(out.report.mpvpe_mm < 1e-9);
  CHECK(out.report.accel_err_mm_s2 < 1e-9);
  CHECK(out.report.sequence_count == 3);
  CHECK(out.report.frame_count == 3 * (kFrames - window + 1));
  CHECK(out.report.fps == 25.0);
  REQUIRE(out.rows.size() == 3);
  for (const auto& row : out.rows) {
    CHECK(row.frames == kFrames - window + 1);
    CHECK(row.mpjpe_mm < 1e-9);
  }
  // interior frames only in the traces
  REQUIRE(out.accel_traces.size() == 3);
  for (const auto& tr : out.accel_traces)
    CHECK(tr.size() == static_cast<std::size_t>(kFrames - window + 1 - 2));
}

TEST_CASE("prediction covers exactly the frames with full window context") {
  Dataset data = tiny_dataset();
  NetworkConfig nc = tiny_net_cfg();
  Network net = Network::create(nc, data.mean_raw(), 17);
  PredictionSet preds = predict(net, data, data.eval_split());
  REQUIRE(preds.ids.size() == 3);
  CHECK(preds.fps == 25.0);
  CHECK(preds.joints == kJoints);
  CHECK(preds.shape_dim == kShape);
  const int current_offset = nc.temporal.current_index();
  for (std::size_t s = 0; s < preds.ids.size(); ++s) {
    CHECK(preds.ids[s] == data.eval_split()[s].motion.id);
    CHECK(preds.first_frame[s] == current_offset);
    CHECK(preds.params[s].size() ==
          static_cast<std::size_t>(kFrames - nc.temporal.window + 1));
  }
}

TEST_CASE("inference never touches the forecast parameter branches") {
  Dataset data = tiny_dataset();
  Network net = Network::create(tiny_net_cfg(), data.mean_raw(), 18);
  CHECK(net.forecast_regressions() == 0);
  predict(net, data, data.eval_split());
  CHECK(net.forecast_regressions() == 0);
}

TEST_CASE("evaluation is deterministic and batch-size independent") {
  Dataset data = tiny_dataset();
  Network net = Network::create(tiny_net_cfg(), data.mean_raw(), 19);
  EvalOutput a = evaluate(net, data, data.eval_split());
  EvalOutput b = evaluate(net, data, data.eval_split());
  CHECK(a.report.to_json_text() == b.report.to_json_text());

  EvalOptions small_batches;
  small_batches.batch_size = 3;
  EvalOutput c = evaluate(net, data, data.eval_split(), small_batches);
  CHECK(c.report.pa_mpjpe_mm == doctest::Approx(a.report.pa_mpjpe_mm).epsilon(1e-12));
  CHECK(c.report.frame_count == a.report.frame_count);
}

TEST_CASE("evaluate equals predict plus score") {
  Dataset data = tiny_dataset();
  Network net = Network::create(tiny_net_cfg(), data.mean_raw(), 20);
  EvalOutput combined = evaluate(net, data, data.eval_split());
  EvalOutput staged = score(predict(net, data, data.eval_split()), data,
                            data.eval_split());
  CHECK(combined.report.to_json_text() == staged.report.to_json_text());
}

TEST_CASE("sequence cap restricts the scored split prefix") {
  Dataset data = tiny_dataset();
  Network net = Network::create(tiny_net_cfg(), data.mean_raw(), 21);
  EvalOptions opt;
  opt.max_sequences = 1;
  EvalOutput out = evaluate(net, data, data.eval_split(), opt);
  CHECK(out.report.sequence_count == 1);
  CHECK(out.rows.size() == 1);
  CHECK(out.rows[0].id == data.eval_split()[0].motion.id);
}

TEST_CASE("prediction container round trip is lossless") {
  Dataset data = tiny_dataset();
  Network net = Network::create(tiny_net_cfg(), data.mean_raw(), 22);
  PredictionSet preds = predict(net, data, data.eval_split());
  auto path = temp_file("preds-rt");
  FileGuard guard{path};
  preds.save(path.string());
  PredictionSet back = PredictionSet::load(path.string());

  CHECK(back.fps == preds.fps);
  CHECK(back.joints == preds.joints);
  CHECK(back.shape_dim == preds.shape_dim);
  REQUIRE(back.ids.size() == preds.ids.size());
  for (std::size_t s = 0; s < preds.ids.size(); ++s) {
    CHECK(back.ids[s] == preds.ids[s]);
    CHECK(back.first_frame[s] == preds.first_frame[s]);
    REQUIRE(back.params[s].size() == preds.params[s].size());
    for (std::size_t t = 0; t < preds.params[s].size(); ++t) {
      const auto& pa = preds.params[s][t];
      const auto& pb = back.params[s][t];
      CHECK((pa.theta - pb.theta).cwiseAbs().maxCoeff() == 0.0);
      CHECK((pa.beta - pb.beta).cwiseAbs().maxCoeff() == 0.0);
      CHECK(pa.cam_s == pb.cam_s);
      CHECK((pa.cam_t - pb.cam_t).cwiseAbs().maxCoeff() == 0.0);
    }
  }

  // scoring the reloaded set gives the identical report
  CHECK(score(back, data, data.eval_split()).report.to_json_text() ==
        score(preds, data, data.eval_split()).report.to_json_text());
}

TEST_CASE("scoring rejects predictions from a different split shape") {
  Dataset data = tiny_dataset();
  PredictionSet oracle = oracle_predictions(data, data.eval_split(), 8);
  oracle.ids[0] = "someone-else";
  CHECK_THROWS(score(oracle, data, data.eval_split()));
}
