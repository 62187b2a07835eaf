// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tempose/ablation.hpp"
#include "support.hpp"

#include <cmath>
#include <random>

using namespace tempose;
using test_support::chain_model;

namespace {

constexpr int kJoints = 4;
constexpr int kShape = 2;
constexpr int kFeature = 20;

Dataset tiny_dataset() {
  std::mt19937_64 rng(151);
  body::BodyModel model = chain_model(rng, kJoints, kShape, 3);
  DatasetConfig cfg;
  cfg.motion.frames = 20;
  cfg.motion.fps = 25.0;
  cfg.feature.feature_dim = kFeature;
  cfg.train_sequences = 2;
  cfg.eval_sequences = 2;
  return Dataset::generate(model, cfg, 61);
}

RunConfig tiny_config() {
  RunConfig cfg;
  cfg.network.temporal.window = 8;
  cfg.network.temporal.feature_dim = kFeature;
  cfg.network.temporal.gru_hidden = 10;  // all_dim 20 keeps residual legal
  cfg.network.temporal.forecast_hidden = 6;
  cfg.network.temporal.bottleneck = 4;
  cfg.network.temporal.attention_hidden = {5};
  cfg.network.joints = kJoints;
  cfg.network.shape_dim = kShape;
  cfg.network.regressor_iters = 1;
  cfg.network.regressor_hidden = {12};
  cfg.optimizer.epochs = 1;
  cfg.optimizer.batch_size = 16;
  cfg.val_sequences = 2;
  return cfg;
}

}  // namespace

TEST_CASE("the architecture grid carries the expected flags") {
  auto vs = core_variants();
  REQUIRE(vs.size() == 5);
  auto get = [&](const std::string& name) -> const AblationVariant& {
    for (const auto& v : vs)
      if (v.name == name) return v;
    REQUIRE(false);
    return vs[0];
  };
  CHECK_FALSE(get("forecast").use_residual);
  CHECK(get("forecast").poseforecast);
  CHECK_FALSE(get("forecast").includes_current);
  CHECK_FALSE(get("no_forecast").poseforecast);
  CHECK(get("residual_forecast").use_residual);
  CHECK(get("residual_forecast").poseforecast);
  CHECK(get("residual_no_forecast").use_residual);
  CHECK_FALSE(get("residual_no_forecast").poseforecast);
  CHECK(get("forecast_with_current").includes_current);
  CHECK(get("forecast_with_current").poseforecast);

  auto sv = supervision_variants();
  REQUIRE(sv.size() == 2);
  CHECK(sv[0].supervision == SupervisionTarget::adjacent);
  CHECK(sv[1].supervision == SupervisionTarget::none);
}

TEST_CASE("applying a variant rewrites exactly the architecture flags") {
  RunConfig base = tiny_config();
  base.seed = 9;
  AblationVariant v{"x", true, false, true, SupervisionTarget::none};
  RunConfig out = v.apply(base);
  CHECK(out.network.temporal.use_residual);
  CHECK_FALSE(out.network.temporal.poseforecast_enabled);
  CHECK(out.network.temporal.poseforecast_includes_current);
  CHECK(out.loss.supervision_target == SupervisionTarget::none);
  // everything else is untouched
  CHECK(out.seed == 9);
  CHECK(out.network.temporal.gru_hidden == base.network.temporal.gru_hidden);
  CHECK(out.optimizer.epochs == base.optimizer.epochs);
}

TEST_CASE("variant statistics") {
  VariantResult r;
  r.pa_mpjpe_mm = {10.0, 14.0, 12.0};
  r.accel_err_mm_s2 = {4.0, 4.0, 4.0};
  CHECK(r.mean_pa() == doctest::Approx(12.0));
  CHECK(r.sd_pa() == doctest::Approx(2.0));
  CHECK(r.mean_accel() == doctest::Approx(4.0));
  CHECK(r.sd_accel() == 0.0);
}

TEST_CASE("grid run trains every pair and tabulates") {
  Dataset data = tiny_dataset();
  RunConfig base = tiny_config();
  std::vector<AblationVariant> two{
      {"forecast", false, true, false, SupervisionTarget::current},
      {"no_forecast", false, false, false, SupervisionTarget::current},
  };
  std::vector<std::string> progress;
  AblationResult res = ablate(base, data, {0, 1}, two, 1,
                              [&](const std::string& m) { progress.push_back(m); });
  REQUIRE(res.rows.size() == 2);
  CHECK(res.seeds == std::vector<std::uint64_t>{0, 1});
  for (const auto& row : res.rows) {
    CHECK_FALSE(row.failed);
    REQUIRE(row.pa_mpjpe_mm.size() == 2);
    REQUIRE(row.accel_err_mm_s2.size() == 2);
    for (double v : row.pa_mpjpe_mm) CHECK(std::isfinite(v));
    for (double v : row.accel_err_mm_s2) CHECK(v > 0.0);
  }
  CHECK(res.find("forecast") != nullptr);
  CHECK(res.find("no_forecast") != nullptr);
  CHECK(res.find("missing") == nullptr);
  CHECK_FALSE(progress.empty());

  const std::string table = res.to_table();
  CHECK(table.find("forecast") != std::string::npos);
  CHECK(table.find("ok") != std::string::npos);
  const nlohmann::json j = res.to_json();
  CHECK(j.at("rows").size() == 2);

  // per-seed runs differ (the seed reaches the network init)
  const VariantResult* f = res.find("forecast");
  CHECK(f->pa_mpjpe_mm[0] != f->pa_mpjpe_mm[1]);
}

TEST_CASE("a failing variant is marked without stopping the grid") {
  Dataset data = tiny_dataset();
  RunConfig base = tiny_config();
  base.network.temporal.gru_hidden = 6;  // all_dim 12 != feature 20: residual invalid
  std::vector<AblationVariant> two{
      {"residual_forecast", true, true, false, SupervisionTarget::current},
      {"forecast", false, true, false, SupervisionTarget::current},
  };
  AblationResult res = ablate(base, data, {0}, two);
  const VariantResult* bad = res.find("residual_forecast");
  const VariantResult* good = res.find("forecast");
  REQUIRE(bad != nullptr);
  REQUIRE(good != nullptr);
  CHECK(bad->failed);
  CHECK_FALSE(bad->error.empty());
  CHECK_FALSE(good->failed);
  CHECK(good->pa_mpjpe_mm.size() == 1);
  CHECK(res.to_table().find("FAILED") != std::string::npos);
}

TEST_CASE("parallel execution matches the serial result") {
  Dataset data = tiny_dataset();
  RunConfig base = tiny_config();
  std::vector<AblationVariant> two{
      {"forecast", false, true, false, SupervisionTarget::current},
      {"no_forecast", false, false, false, SupervisionTarget::current},
  };
  AblationResult serial = ablate(base, data, {0, 1}, two, 1);
  AblationResult parallel = ablate(base, data, {0, 1}, two, 2);
  REQUIRE(serial.rows.size() == parallel.rows.size());
  for (const auto& row : serial.rows) {
    const VariantResult* other = parallel.find(row.name);
    REQUIRE(other != nullptr);
    REQUIRE(other->pa_mpjpe_mm.size() == row.pa_mpjpe_mm.size());
    for (std::size_t i = 0; i < row.pa_mpjpe_mm.size(); ++i) {
      CHECK(other->pa_mpjpe_mm[i] == row.pa_mpjpe_mm[i]);
      CHECK(other->accel_err_mm_s2[i] == row.accel_err_mm_s2[i]);
    }
  }
}
