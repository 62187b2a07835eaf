// SPDX-License-Identifier: Apache-2.0

#include "tempose/metrics.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace tempose {

ProcrustesResult procrustes_align(const Mat& pred, const Mat& gt) {
  if (pred.rows() != gt.rows() || pred.cols() != 3 || gt.cols() != 3)
    throw std::invalid_argument("procrustes_align: inputs must be N x 3");
  const Eigen::Index n = pred.rows();
  if (n < 3) throw std::invalid_argument("procrustes_align: need >= 3 points");

  Eigen::RowVector3d mu_p = pred.colwise().mean();
  Eigen::RowVector3d mu_g = gt.colwise().mean();
  Mat x = pred.rowwise() - mu_p;
  Mat y = gt.rowwise() - mu_g;

  ProcrustesResult r;
  const double var_p = x.squaredNorm();
  if (var_p < 1e-18) {
    // Collapsed prediction: no rotation or scale is identifiable.
    r.aligned = x;
    r.aligned.rowwise() += mu_g;
    r.rotation = Mat::Identity(3, 3);
    r.scale = 1.0;
    r.translation = (mu_g - mu_p).transpose();
    r.translation_only = true;
    return r;
  }

  Mat h = x.transpose() * y;  // 3 x 3 cross covariance (unnormalized)
  Eigen::JacobiSVD<Mat> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat u = svd.matrixU();
  Mat v = svd.matrixV();
  Vec s = svd.singularValues();
  Vec d = Vec::Ones(3);
  if ((v * u.transpose()).determinant() < 0) d(2) = -1.0;  // reflection guard

  Mat rot = v * d.asDiagonal() * u.transpose();
  const double scale = s.dot(d) / var_p;
  r.rotation = rot;
  r.scale = scale;
  r.aligned = (scale * (rot * x.transpose())).transpose();
  r.aligned.rowwise() += mu_g;
  r.translation = (mu_g.transpose() - scale * rot * mu_p.transpose());
  return r;
}

namespace {

Mat select_cols(const Mat& m, const std::vector<int>& idx) {
  Mat out(m.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || idx[i] >= m.cols())
      throw std::invalid_argument("joint subset index out of range");
    out.col(static_cast<Eigen::Index>(i)) = m.col(idx[i]);
  }
  return out;
}

Mat root_align(const Mat& pts, int root) {
  return pts.colwise() - Eigen::Vector3d(pts.col(root));
}

double mean_col_distance_mm(const Mat& a, const Mat& b) {
  return (a - b).colwise().norm().mean() * 1000.0;
}

}  // namespace

double mpjpe_mm(const Mat& pred, const Mat& gt, const std::vector<int>& eval_joints,
                int root) {
  if (pred.rows() != 3 || gt.rows() != 3 || pred.cols() != gt.cols())
    throw std::invalid_argument("mpjpe: joint matrices must be 3 x J and match");
  if (eval_joints.empty()) throw std::invalid_argument("mpjpe: empty joint subset");
  Mat pa = root_align(pred, root);
  Mat ga = root_align(gt, root);
  return mean_col_distance_mm(select_cols(pa, eval_joints), select_cols(ga, eval_joints));
}

double pa_mpjpe_mm(const Mat& pred, const Mat& gt, const std::vector<int>& eval_joints) {
  if (pred.rows() != 3 || gt.rows() != 3 || pred.cols() != gt.cols())
    throw std::invalid_argument("pa_mpjpe: joint matrices must be 3 x J and match");
  Mat p = select_cols(pred, eval_joints).transpose();  // N x 3
  Mat g = select_cols(gt, eval_joints).transpose();
  ProcrustesResult r = procrustes_align(p, g);
  return (r.aligned - g).rowwise().norm().mean() * 1000.0;
}

double mpvpe_mm(const Mat& pred_verts, const Mat& gt_verts, const Vec& pred_root,
                const Vec& gt_root) {
  if (pred_verts.rows() != 3 || gt_verts.rows() != 3 ||
      pred_verts.cols() != gt_verts.cols())
    throw std::invalid_argument("mpvpe: vertex matrices must be 3 x V and match");
  Mat pa = pred_verts.colwise() - Eigen::Vector3d(pred_root);
  Mat ga = gt_verts.colwise() - Eigen::Vector3d(gt_root);
  return mean_col_distance_mm(pa, ga);
}

AccelError accel_error(const std::vector<Mat>& pred, const std::vector<Mat>& gt,
                       double fps, const std::vector<int>& eval_joints, int root) {
  if (pred.size() != gt.size())
    throw std::invalid_argument("accel_error: sequence length mismatch");
  if (pred.size() < 3)
    throw std::invalid_argument("accel_error: need at least 3 frames");
  if (fps <= 0) throw std::invalid_argument("accel_error: fps must be positive");

  std::vector<Mat> pa(pred.size()), ga(gt.size());
  for (std::size_t t = 0; t < pred.size(); ++t) {
    pa[t] = select_cols(root_align(pred[t], root), eval_joints);
    ga[t] = select_cols(root_align(gt[t], root), eval_joints);
  }

  AccelError out;
  double acc = 0;
  for (std::size_t t = 1; t + 1 < pa.size(); ++t) {
    Mat ap = pa[t + 1] - 2.0 * pa[t] + pa[t - 1];
    Mat ag = ga[t + 1] - 2.0 * ga[t] + ga[t - 1];
    const double frame_err = (ap - ag).colwise().norm().mean() * 1000.0;
    out.per_frame_mm_frame2.push_back(frame_err);
    acc += frame_err;
  }
  out.mm_per_frame2 = acc / static_cast<double>(out.per_frame_mm_frame2.size());
  out.mm_per_s2 = out.mm_per_frame2 * fps * fps;
  return out;
}

void MetricReport::validate() const {
  const double vals[] = {mpjpe_mm, pa_mpjpe_mm, mpvpe_mm, accel_err_mm_s2,
                         accel_err_mm_frame2};
  for (double v : vals)
    if (!std::isfinite(v) || v < 0)
      throw std::runtime_error("MetricReport: metric not finite and nonnegative");
  if (frame_count < 0 || sequence_count < 0)
    throw std::runtime_error("MetricReport: negative counts");
}

std::string MetricReport::to_kv_text() const {
  std::ostringstream os;
  os.precision(9);
  os << "mpjpe_mm " << mpjpe_mm << "\n";
  os << "pa_mpjpe_mm " << pa_mpjpe_mm << "\n";
  os << "mpvpe_mm " << mpvpe_mm << "\n";
  os << "accel_err_mm_s2 " << accel_err_mm_s2 << "\n";
  os << "accel_err_mm_frame2 " << accel_err_mm_frame2 << "\n";
  os << "frame_count " << frame_count << "\n";
  os << "sequence_count " << sequence_count << "\n";
  os << "fps " << fps << "\n";
  return os.str();
}

std::string MetricReport::to_json_text() const {
  nlohmann::json j{{"mpjpe_mm", mpjpe_mm},
                   {"pa_mpjpe_mm", pa_mpjpe_mm},
                   {"mpvpe_mm", mpvpe_mm},
                   {"accel_err_mm_s2", accel_err_mm_s2},
                   {"accel_err_mm_frame2", accel_err_mm_frame2},
                   {"frame_count", frame_count},
                   {"sequence_count", sequence_count},
                   {"fps", fps}};
  return j.dump(2);
}

MetricReport MetricReport::from_json_text(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  MetricReport r;
  r.mpjpe_mm = j.at("mpjpe_mm").get<double>();
  r.pa_mpjpe_mm = j.at("pa_mpjpe_mm").get<double>();
  r.mpvpe_mm = j.at("mpvpe_mm").get<double>();
  r.accel_err_mm_s2 = j.at("accel_err_mm_s2").get<double>();
  r.accel_err_mm_frame2 = j.at("accel_err_mm_frame2").get<double>();
  r.frame_count = j.at("frame_count").get<long>();
  r.sequence_count = j.at("sequence_count").get<long>();
  r.fps = j.at("fps").get<double>();
  return r;
}

MetricReport aggregate(const std::vector<SequenceMetrics>& rows, double fps) {
  MetricReport total;
  total.fps = fps;
  total.sequence_count = static_cast<long>(rows.size());
  if (rows.empty()) return total;
  for (const SequenceMetrics& r : rows) {
    total.mpjpe_mm += r.mpjpe_mm;
    total.pa_mpjpe_mm += r.pa_mpjpe_mm;
    total.mpvpe_mm += r.mpvpe_mm;
    total.accel_err_mm_s2 += r.accel_err_mm_s2;
    total.accel_err_mm_frame2 += r.accel_err_mm_frame2;
    total.frame_count += r.frames;
  }
  const double n = static_cast<double>(rows.size());
  total.mpjpe_mm /= n;
  total.pa_mpjpe_mm /= n;
  total.mpvpe_mm /= n;
  total.accel_err_mm_s2 /= n;
  total.accel_err_mm_frame2 /= n;
  return total;
}

std::string to_table(const std::vector<SequenceMetrics>& rows,
                     const MetricReport& total) {
  std::ostringstream os;
  os.precision(9);
  os << "sequence\tframes\tmpjpe_mm\tpa_mpjpe_mm\tmpvpe_mm\taccel_err_mm_s2"
        "\taccel_err_mm_frame2\n";
  for (const SequenceMetrics& r : rows)
    os << r.id << "\t" << r.frames << "\t" << r.mpjpe_mm << "\t" << r.pa_mpjpe_mm
       << "\t" << r.mpvpe_mm << "\t" << r.accel_err_mm_s2 << "\t"
       << r.accel_err_mm_frame2 << "\n";
  os << "TOTAL\t" << total.frame_count << "\t" << total.mpjpe_mm << "\t"
     << total.pa_mpjpe_mm << "\t" << total.mpvpe_mm << "\t" << total.accel_err_mm_s2
     << "\t" << total.accel_err_mm_frame2 << "\n";
  return os.str();
}

}  // namespace tempose
