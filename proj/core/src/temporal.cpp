// SPDX-License-Identifier: Apache-2.0

#include "tempose/temporal.hpp"

#include <stdexcept>
#include <string>

namespace tempose {

void TemporalConfig::validate() const {
  if (window < 3)
    throw std::invalid_argument("TemporalConfig: window must be >= 3");
  if (feature_dim <= 0 || gru_hidden <= 0 || forecast_hidden <= 0 ||
      bottleneck <= 0)
    throw std::invalid_argument("TemporalConfig: dimensions must be positive");
  for (int h : attention_hidden)
    if (h <= 0)
      throw std::invalid_argument(
          "TemporalConfig: attention hidden sizes must be positive");
  if (use_residual && feature_dim != all_dim())
    throw std::invalid_argument(
        "TemporalConfig: residual connection needs feature_dim == "
        "2*gru_hidden, got " +
        std::to_string(feature_dim) + " vs " + std::to_string(all_dim()));
  if (!poseforecast_enabled && feature_dim != all_dim())
    throw std::invalid_argument(
        "TemporalConfig: without the forecast branches the regressor consumes "
        "g_all directly, so feature_dim must equal 2*gru_hidden");
}

TemporalConfig TemporalConfig::desk() { return TemporalConfig{}; }

TemporalConfig TemporalConfig::paper_scale() {
  TemporalConfig c;
  c.window = 16;
  c.feature_dim = 2048;
  c.gru_hidden = 1024;
  c.forecast_hidden = 1024;
  c.bottleneck = 256;
  c.attention_hidden = {256};
  return c;
}

TemporalEncoder TemporalEncoder::create(const TemporalConfig& cfg,
                                        std::mt19937_64& rng) {
  cfg.validate();
  TemporalEncoder e;
  e.cfg_ = cfg;
  e.forward_ = GruCell::create(cfg.feature_dim, cfg.gru_hidden, rng);
  e.backward_ = GruCell::create(cfg.feature_dim, cfg.gru_hidden, rng);
  if (cfg.poseforecast_enabled) {
    e.past_ = GruCell::create(cfg.feature_dim, cfg.forecast_hidden, rng);
    e.future_ = GruCell::create(cfg.feature_dim, cfg.forecast_hidden, rng);
  }
  return e;
}

namespace {

void check_frames(std::span<const Var> frames, std::size_t expect, int dim,
                  const char* who) {
  if (frames.size() != expect)
    throw std::invalid_argument(std::string(who) + ": expected " +
                                std::to_string(expect) + " frames, got " +
                                std::to_string(frames.size()));
  for (const Var& f : frames)
    if (f.rows() != dim)
      throw std::invalid_argument(std::string(who) + ": frame feature dim " +
                                  std::to_string(f.rows()) + " != " +
                                  std::to_string(dim));
}

}  // namespace

Var TemporalEncoder::encode_all(std::span<const Var> frames) const {
  check_frames(frames, static_cast<std::size_t>(cfg_.window), cfg_.feature_dim,
               "encode_all");
  const int c = cfg_.current_index();
  const Eigen::Index batch = frames[0].cols();
  // Forward direction covers frames 0..c, backward covers T-1..c; both end on
  // the current frame, whose two hidden states are concatenated.
  Var h_fwd = forward_.rollout(frames.subspan(0, c + 1), batch);
  std::vector<Var> rev(frames.rbegin(),
                       frames.rbegin() + (cfg_.window - c));
  Var h_bwd = backward_.rollout(rev, batch);
  std::vector<Var> parts{h_fwd, h_bwd};
  Var g = concat_rows(parts);
  if (cfg_.use_residual) g = g + frames[c];
  return g;
}

Var TemporalEncoder::encode_past(std::span<const Var> frames) const {
  if (!cfg_.poseforecast_enabled)
    throw std::logic_error("encode_past: forecast branches disabled");
  check_frames(frames, static_cast<std::size_t>(cfg_.past_count()),
               cfg_.feature_dim, "encode_past");
  const Eigen::Index batch = frames.empty() ? 1 : frames[0].cols();
  return past_.rollout(frames, batch);
}

Var TemporalEncoder::encode_future(std::span<const Var> frames) const {
  if (!cfg_.poseforecast_enabled)
    throw std::logic_error("encode_future: forecast branches disabled");
  check_frames(frames, static_cast<std::size_t>(cfg_.future_count()),
               cfg_.feature_dim, "encode_future");
  const Eigen::Index batch = frames.empty() ? 1 : frames[0].cols();
  return future_.rollout(frames, batch);
}

TemporalEncoder::Outputs TemporalEncoder::encode_window(
    std::span<const Var> frames) const {
  Outputs out;
  out.all = encode_all(frames);
  if (!cfg_.poseforecast_enabled) return out;
  const int c = cfg_.current_index();
  const std::size_t past_n = static_cast<std::size_t>(cfg_.past_count());
  out.past = encode_past(frames.subspan(0, past_n));
  std::vector<Var> rev;
  const int first_future =
      cfg_.poseforecast_includes_current ? c : c + 1;  // reverse time order
  for (int t = cfg_.window - 1; t >= first_future; --t) rev.push_back(frames[t]);
  out.future = encode_future(rev);
  return out;
}

void TemporalEncoder::collect_params(std::vector<Var>& out) const {
  forward_.collect_params(out);
  backward_.collect_params(out);
  if (cfg_.poseforecast_enabled) {
    past_.collect_params(out);
    future_.collect_params(out);
  }
}

IntegrationHead IntegrationHead::create(const TemporalConfig& cfg,
                                        std::mt19937_64& rng) {
  cfg.validate();
  IntegrationHead h;
  h.cfg_ = cfg;
  h.w_all_ = init_weight(cfg.feature_dim, cfg.all_dim(), rng);
  h.b_all_ = init_bias(cfg.feature_dim);
  h.w_past_ = init_weight(cfg.feature_dim, cfg.forecast_hidden, rng);
  h.b_past_ = init_bias(cfg.feature_dim);
  h.w_future_ = init_weight(cfg.feature_dim, cfg.forecast_hidden, rng);
  h.b_future_ = init_bias(cfg.feature_dim);
  h.w_shared_ = init_weight(cfg.bottleneck, cfg.feature_dim, rng);
  h.b_shared_ = init_bias(cfg.bottleneck);
  int in = 3 * cfg.bottleneck;
  for (int width : cfg.attention_hidden) {
    h.attn_w_.push_back(init_weight(width, in, rng));
    h.attn_b_.push_back(init_bias(width));
    in = width;
  }
  h.attn_w_.push_back(init_weight(3, in, rng));
  h.attn_b_.push_back(init_bias(3));
  return h;
}

TemporalFeatures IntegrationHead::integrate(const Var& g_all, const Var& g_past,
                                            const Var& g_future,
                                            const Var* forced_attention) const {
  if (g_all.rows() != cfg_.all_dim() || g_past.rows() != cfg_.forecast_hidden ||
      g_future.rows() != cfg_.forecast_hidden)
    throw std::invalid_argument("integrate: branch dimension mismatch");
  if (g_all.cols() != g_past.cols() || g_all.cols() != g_future.cols())
    throw std::invalid_argument("integrate: batch size mismatch");

  TemporalFeatures f;
  f.g_all = g_all;
  f.g_past = g_past;
  f.g_future = g_future;
  f.gp_all = add_colwise(w_all_ * relu(g_all), b_all_);
  f.gp_past = add_colwise(w_past_ * relu(g_past), b_past_);
  f.gp_future = add_colwise(w_future_ * relu(g_future), b_future_);

  if (forced_attention != nullptr) {
    if (forced_attention->rows() != 3 || forced_attention->cols() != g_all.cols())
      throw std::invalid_argument("integrate: forced attention must be 3 x batch");
    f.attention = *forced_attention;
  } else {
    Var code_all = add_colwise(w_shared_ * f.gp_all, b_shared_);
    Var code_past = add_colwise(w_shared_ * f.gp_past, b_shared_);
    Var code_future = add_colwise(w_shared_ * f.gp_future, b_shared_);
    std::vector<Var> codes{code_all, code_past, code_future};
    Var x = concat_rows(codes);
    for (std::size_t i = 0; i < attn_w_.size(); ++i) {
      x = add_colwise(attn_w_[i] * x, attn_b_[i]);
      if (i + 1 < attn_w_.size()) x = relu(x);
    }
    f.attention = softmax(x);
  }

  f.g_int = colscale(f.gp_all, slice_rows(f.attention, 0, 1)) +
            colscale(f.gp_past, slice_rows(f.attention, 1, 1)) +
            colscale(f.gp_future, slice_rows(f.attention, 2, 1));
  return f;
}

void IntegrationHead::collect_params(std::vector<Var>& out) const {
  out.push_back(w_all_);
  out.push_back(b_all_);
  out.push_back(w_past_);
  out.push_back(b_past_);
  out.push_back(w_future_);
  out.push_back(b_future_);
  out.push_back(w_shared_);
  out.push_back(b_shared_);
  for (const Var& w : attn_w_) out.push_back(w);
  for (const Var& b : attn_b_) out.push_back(b);
}

}  // namespace tempose
