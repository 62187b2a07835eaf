// SPDX-License-Identifier: Apache-2.0
//
// Evaluation metrics. Geometry enters in meters; every reported value is in
// millimeters. Joint matrices follow the FK layout (3 x N, one column per
// point) except procrustes_align, which takes one point per row.

#pragma once

#include "tempose/tensor.hpp"

#include <string>
#include <vector>

namespace tempose {

struct ProcrustesResult {
  Mat aligned;       // N x 3, similarity-transformed prediction
  Mat rotation;      // 3 x 3
  double scale = 1;
  Vec translation;   // 3
  bool translation_only = false;  // set for degenerate (collapsed) predictions
};

// Closed-form similarity alignment minimizing sum |s R p_i + t - g_i|^2.
// pred and gt are N x 3 with N >= 3.
ProcrustesResult procrustes_align(const Mat& pred, const Mat& gt);

// Mean per-joint position error after root alignment, in mm. pred/gt are
// 3 x J; eval_joints selects the scored subset (root excluded or not by the
// caller's subset choice).
double mpjpe_mm(const Mat& pred, const Mat& gt, const std::vector<int>& eval_joints,
                int root = 0);

// Procrustes-aligned variant; alignment computed on the same joint subset.
double pa_mpjpe_mm(const Mat& pred, const Mat& gt, const std::vector<int>& eval_joints);

// Mean per-vertex error after root-joint alignment, in mm. Vertices 3 x V.
double mpvpe_mm(const Mat& pred_verts, const Mat& gt_verts, const Vec& pred_root,
                const Vec& gt_root);

struct AccelError {
  double mm_per_s2 = 0;
  double mm_per_frame2 = 0;
  std::vector<double> per_frame_mm_frame2;  // one entry per interior frame
};

// Mean |a_pred - a_gt| over joints and interior frames, a = second central
// difference of root-aligned joint tracks. Sequences are vectors of 3 x J
// frames; length >= 3 required.
AccelError accel_error(const std::vector<Mat>& pred, const std::vector<Mat>& gt,
                       double fps, const std::vector<int>& eval_joints,
                       int root = 0);

struct MetricReport {
  double mpjpe_mm = 0;
  double pa_mpjpe_mm = 0;
  double mpvpe_mm = 0;
  double accel_err_mm_s2 = 0;
  double accel_err_mm_frame2 = 0;
  long frame_count = 0;
  long sequence_count = 0;
  double fps = 0;

  void validate() const;  // finite, nonnegative
  std::string to_kv_text() const;
  std::string to_json_text() const;
  static MetricReport from_json_text(const std::string& text);
};

// One scored sequence; aggregate() averages rows (frames first within a row,
// then uniformly across rows).
struct SequenceMetrics {
  std::string id;
  long frames = 0;
  double mpjpe_mm = 0;
  double pa_mpjpe_mm = 0;
  double mpvpe_mm = 0;
  double accel_err_mm_s2 = 0;
  double accel_err_mm_frame2 = 0;
};

MetricReport aggregate(const std::vector<SequenceMetrics>& rows, double fps);

// Tab-separated table: header, one row per sequence, one aggregate row.
std::string to_table(const std::vector<SequenceMetrics>& rows,
                     const MetricReport& total);

}  // namespace tempose
