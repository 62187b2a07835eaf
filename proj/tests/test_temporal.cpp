// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tempose/temporal.hpp"

#include <random>
#include <vector>

using namespace tempose;

namespace {

TemporalConfig small_cfg() {
  TemporalConfig c;
  c.window = 8;
  c.feature_dim = 10;
  c.gru_hidden = 5;
  c.forecast_hidden = 6;
  c.bottleneck = 4;
  c.attention_hidden = {5};
  return c;
}

Mat random_mat(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Mat m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = d(rng);
  return m;
}

std::vector<Var> random_window(std::mt19937_64& rng, const TemporalConfig& cfg,
                               Eigen::Index batch, bool needs_grad = false) {
  std::vector<Var> frames;
  for (int t = 0; t < cfg.window; ++t)
    frames.push_back(Var::leaf(random_mat(rng, cfg.feature_dim, batch), needs_grad));
  return frames;
}

void zero_params(auto& module) {
  std::vector<Var> ps;
  module.collect_params(ps);
  for (Var& p : ps) p.mutable_value().setZero();
}

}  // namespace

TEST_CASE("frame bookkeeping matches the sixteen-frame convention") {
  TemporalConfig c = TemporalConfig::desk();
  REQUIRE(c.window == 16);
  // 1-based frame 8 is current; 7 strictly-past and 8 strictly-future frames
  CHECK(c.current_index() == 7);
  CHECK(c.past_count() == 7);
  CHECK(c.future_count() == 8);
  c.poseforecast_includes_current = true;
  CHECK(c.past_count() == 8);
  CHECK(c.future_count() == 9);

  TemporalConfig p = TemporalConfig::paper_scale();
  CHECK(p.feature_dim == 2048);
  CHECK(p.all_dim() == 2048);
  CHECK(p.forecast_hidden == 1024);
  CHECK(p.bottleneck == 256);
  p.validate();
}

TEST_CASE("config validation rejects inconsistent dimensions") {
  TemporalConfig c = small_cfg();
  c.validate();
  c.window = 2;
  CHECK_THROWS(c.validate());
  c = small_cfg();
  c.use_residual = true;  // feature_dim 10 != all_dim 10? gru_hidden 5 -> ok
  c.validate();
  c.gru_hidden = 4;  // all_dim 8 != feature_dim 10 with residual on
  CHECK_THROWS(c.validate());
  c = small_cfg();
  c.poseforecast_enabled = false;
  c.gru_hidden = 4;  // regressor would see all_dim != feature_dim: rejected
  CHECK_THROWS(c.validate());
}

TEST_CASE("all-zero weights give zero temporal features") {
  std::mt19937_64 rng(31);
  TemporalConfig cfg = small_cfg();
  TemporalEncoder enc = TemporalEncoder::create(cfg, rng);
  zero_params(enc);
  Tape tape;
  auto frames = random_window(rng, cfg, 2);
  auto outs = enc.encode_window(frames);
  CHECK(outs.all.value().cwiseAbs().maxCoeff() == 0.0);
  CHECK(outs.past.value().cwiseAbs().maxCoeff() == 0.0);
  CHECK(outs.future.value().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("residual toggle adds exactly the current frame") {
  TemporalConfig cfg = small_cfg();
  std::mt19937_64 rng_a(32), rng_b(32), rng_frames(33);
  TemporalEncoder plain = TemporalEncoder::create(cfg, rng_a);
  cfg.use_residual = true;
  TemporalEncoder residual = TemporalEncoder::create(cfg, rng_b);

  Tape tape;
  auto frames = random_window(rng_frames, cfg, 3);
  // (x + f) - x reintroduces one rounding step, so compare to a few ulps.
  Mat diff = residual.encode_all(frames).value() - plain.encode_all(frames).value();
  CHECK((diff - frames[cfg.current_index()].value()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("past and future encoders never see the current frame") {
  std::mt19937_64 rng(34);
  TemporalConfig cfg = small_cfg();
  TemporalEncoder enc = TemporalEncoder::create(cfg, rng);
  auto frames = random_window(rng, cfg, 2);

  Mat past0, future0;
  {
    Tape tape;
    auto outs = enc.encode_window(frames);
    past0 = outs.past.value();
    future0 = outs.future.value();
  }
  // arbitrary large perturbation of the current frame
  frames[cfg.current_index()].mutable_value().array() += 1e6;
  {
    Tape tape;
    auto outs = enc.encode_window(frames);
    CHECK((outs.past.value() - past0).cwiseAbs().maxCoeff() == 0.0);
    CHECK((outs.future.value() - future0).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("graph reachability confirms the independence") {
  std::mt19937_64 rng(35);
  TemporalConfig cfg = small_cfg();
  TemporalEncoder enc = TemporalEncoder::create(cfg, rng);
  Tape tape;
  auto frames = random_window(rng, cfg, 2, true);
  auto outs = enc.encode_window(frames);
  tape.backward(sum(outs.past) + sum(outs.future));
  const Var& current = frames[cfg.current_index()];
  // zero-size or all-zero gradient: the node was never visited
  CHECK((current.grad().size() == 0 ||
         current.grad().cwiseAbs().maxCoeff() == 0.0));
  // sanity: a genuinely used frame does receive gradient
  CHECK(frames[0].grad().size() > 0);
  CHECK(frames[0].grad().cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("the includes-current variant reads the current frame") {
  std::mt19937_64 rng(36);
  TemporalConfig cfg = small_cfg();
  cfg.poseforecast_includes_current = true;
  TemporalEncoder enc = TemporalEncoder::create(cfg, rng);
  auto frames = random_window(rng, cfg, 1);
  Mat past0, future0;
  {
    Tape tape;
    auto outs = enc.encode_window(frames);
    past0 = outs.past.value();
    future0 = outs.future.value();
  }
  frames[cfg.current_index()].mutable_value().array() += 0.5;
  {
    Tape tape;
    auto outs = enc.encode_window(frames);
    CHECK((outs.past.value() - past0).cwiseAbs().maxCoeff() > 0.0);
    CHECK((outs.future.value() - future0).cwiseAbs().maxCoeff() > 0.0);
  }
}

TEST_CASE("window slicing matches the direct branch calls") {
  std::mt19937_64 rng(37);
  TemporalConfig cfg = small_cfg();
  TemporalEncoder enc = TemporalEncoder::create(cfg, rng);
  Tape tape;
  auto frames = random_window(rng, cfg, 2);
  auto outs = enc.encode_window(frames);

  const int c = cfg.current_index();
  std::vector<Var> past(frames.begin(), frames.begin() + c);
  std::vector<Var> future;
  for (int t = cfg.window - 1; t > c; --t) future.push_back(frames[t]);

  CHECK((outs.all.value() - enc.encode_all(frames).value()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((outs.past.value() - enc.encode_past(past).value()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((outs.future.value() - enc.encode_future(future).value()).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS(enc.encode_all(past));  // wrong window length
}

TEST_CASE("attention lies on the simplex and the blend is a convex combination") {
  std::mt19937_64 rng(38);
  TemporalConfig cfg = small_cfg();
  IntegrationHead head = IntegrationHead::create(cfg, rng);
  Tape tape;
  const int B = 5;
  Var g_all = Var::leaf(random_mat(rng, cfg.all_dim(), B));
  Var g_past = Var::leaf(random_mat(rng, cfg.forecast_hidden, B));
  Var g_future = Var::leaf(random_mat(rng, cfg.forecast_hidden, B));
  TemporalFeatures f = head.integrate(g_all, g_past, g_future);

  REQUIRE(f.attention.rows() == 3);
  REQUIRE(f.attention.cols() == B);
  for (int b = 0; b < B; ++b) {
    CHECK(f.attention.value().col(b).sum() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(f.attention.value().col(b).minCoeff() >= 0.0);
  }
  // per coordinate, the blend must sit inside the branch hull
  for (int i = 0; i < cfg.feature_dim; ++i)
    for (int b = 0; b < B; ++b) {
      const double lo = std::min({f.gp_all.value()(i, b), f.gp_past.value()(i, b),
                                  f.gp_future.value()(i, b)});
      const double hi = std::max({f.gp_all.value()(i, b), f.gp_past.value()(i, b),
                                  f.gp_future.value()(i, b)});
      CHECK(f.g_int.value()(i, b) >= lo - 1e-12);
      CHECK(f.g_int.value()(i, b) <= hi + 1e-12);
    }
}

TEST_CASE("forced attention reaches the convex-hull corners") {
  std::mt19937_64 rng(39);
  TemporalConfig cfg = small_cfg();
  IntegrationHead head = IntegrationHead::create(cfg, rng);
  Tape tape;
  const int B = 2;
  Var g_all = Var::leaf(random_mat(rng, cfg.all_dim(), B));
  Var g_past = Var::leaf(random_mat(rng, cfg.forecast_hidden, B));
  Var g_future = Var::leaf(random_mat(rng, cfg.forecast_hidden, B));

  Mat pick = Mat::Zero(3, B);
  pick.row(0).setOnes();  // (1, 0, 0): all weight on the full-window branch
  Var forced = Var::leaf(pick);
  TemporalFeatures f = head.integrate(g_all, g_past, g_future, &forced);
  CHECK((f.g_int.value() - f.gp_all.value()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((f.attention.value() - pick).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("zero integration weights spread attention uniformly") {
  std::mt19937_64 rng(40);
  TemporalConfig cfg = small_cfg();
  IntegrationHead head = IntegrationHead::create(cfg, rng);
  zero_params(head);
  Tape tape;
  Var g_all = Var::leaf(random_mat(rng, cfg.all_dim(), 2));
  Var g_past = Var::leaf(random_mat(rng, cfg.forecast_hidden, 2));
  Var g_future = Var::leaf(random_mat(rng, cfg.forecast_hidden, 2));
  TemporalFeatures f = head.integrate(g_all, g_past, g_future);
  CHECK((f.attention.value().array() - 1.0 / 3.0).abs().maxCoeff() < 1e-15);
  CHECK(f.gp_all.value().cwiseAbs().maxCoeff() == 0.0);
  CHECK(f.g_int.value().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("encoding a batch equals encoding its columns separately") {
  std::mt19937_64 rng(41);
  TemporalConfig cfg = small_cfg();
  TemporalEncoder enc = TemporalEncoder::create(cfg, rng);
  Tape tape;
  auto frames = random_window(rng, cfg, 3);
  auto batch = enc.encode_window(frames);
  std::vector<Var> col0;
  for (const Var& f : frames) col0.push_back(Var::leaf(Mat(f.value().col(0))));
  auto single = enc.encode_window(col0);
  CHECK((batch.all.value().col(0) - single.all.value().col(0)).cwiseAbs().maxCoeff() <
        1e-14);
  CHECK((batch.past.value().col(0) - single.past.value().col(0)).cwiseAbs().maxCoeff() <
        1e-14);
}
