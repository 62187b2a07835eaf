// SPDX-License-Identifier: Apache-2.0
//
// Temporal encoding of per-frame feature vectors.
//
// A window of T frames is reduced to three temporal features: g_all from a
// bi-directional GRU over the whole window, and g_past / g_future from
// uni-directional GRUs over the frames strictly before / after the current
// frame. An attention head blends the three into one integrated feature that
// the body-parameter regressor consumes.

#pragma once

#include "tempose/gru.hpp"
#include "tempose/tensor.hpp"

#include <random>
#include <span>
#include <vector>

namespace tempose {

struct TemporalConfig {
  int window = 16;           // frames per window (T)
  int feature_dim = 96;      // per-frame input feature size (d_f)
  int gru_hidden = 48;       // per-direction hidden size of the full encoder
  int forecast_hidden = 48;  // hidden size of the past/future encoders
  int bottleneck = 12;       // shared code size feeding the attention head
  std::vector<int> attention_hidden = {12};  // widths between 3*bottleneck and 3

  bool use_residual = false;         // add the current frame feature to g_all
  bool poseforecast_enabled = true;  // build past/future branches + attention
  bool poseforecast_includes_current = false;

  // 0-based index of the current frame: the floor(T/2)-th frame 1-based.
  // T=16 puts it at index 7, leaving 7 past and 8 future frames.
  int current_index() const { return window / 2 - 1; }
  int past_count() const {
    return current_index() + (poseforecast_includes_current ? 1 : 0);
  }
  int future_count() const {
    return window - 1 - current_index() + (poseforecast_includes_current ? 1 : 0);
  }
  int all_dim() const { return 2 * gru_hidden; }

  void validate() const;  // throws std::invalid_argument

  static TemporalConfig desk();
  static TemporalConfig paper_scale();
};

// Everything the integration head produces for one window (batched by column).
struct TemporalFeatures {
  Var g_all, g_past, g_future;     // raw encoder outputs
  Var gp_all, gp_past, gp_future;  // after per-branch ReLU + FC to feature_dim
  Var g_int;                       // attention-weighted blend
  Var attention;                   // 3 x batch, columns on the simplex
};

class TemporalEncoder {
 public:
  TemporalEncoder() = default;
  static TemporalEncoder create(const TemporalConfig& cfg, std::mt19937_64& rng);

  // frames is the whole window: exactly T entries, each feature_dim x batch.
  Var encode_all(std::span<const Var> frames) const;

  // Sub-window rollouts. encode_past takes past frames in forward time order;
  // encode_future takes future frames in reverse time order (latest first).
  // Lengths must equal past_count() / future_count().
  Var encode_past(std::span<const Var> frames) const;
  Var encode_future(std::span<const Var> frames) const;

  // Slices the window and runs every enabled branch. past/future are invalid
  // Vars when the forecast branches are disabled.
  struct Outputs {
    Var all, past, future;
  };
  Outputs encode_window(std::span<const Var> frames) const;

  const TemporalConfig& config() const { return cfg_; }
  void collect_params(std::vector<Var>& out) const;

 private:
  TemporalConfig cfg_;
  GruCell forward_, backward_;  // full-window encoder pair
  GruCell past_, future_;       // forecast branches (present iff enabled)
};

class IntegrationHead {
 public:
  IntegrationHead() = default;
  static IntegrationHead create(const TemporalConfig& cfg, std::mt19937_64& rng);

  // forced_attention (3 x batch) bypasses the attention network when set;
  // the blend still uses the branch FCs. Test hook only.
  TemporalFeatures integrate(const Var& g_all, const Var& g_past,
                             const Var& g_future,
                             const Var* forced_attention = nullptr) const;

  void collect_params(std::vector<Var>& out) const;

 private:
  TemporalConfig cfg_;
  Var w_all_, b_all_, w_past_, b_past_, w_future_, b_future_;
  Var w_shared_, b_shared_;
  std::vector<Var> attn_w_, attn_b_;
};

}  // namespace tempose
