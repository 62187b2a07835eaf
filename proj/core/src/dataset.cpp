// SPDX-License-Identifier: Apache-2.0

#include "tempose/dataset.hpp"

#include "tempose/regressor.hpp"
#include "tempose/serialize.hpp"

#include <stdexcept>
#include <utility>

namespace tempose {

void DatasetConfig::validate() const {
  motion.validate();
  feature.validate();
  if (train_sequences < 1 || eval_sequences < 1)
    throw std::invalid_argument("DatasetConfig: need at least one sequence per split");
}

nlohmann::json DatasetConfig::to_json() const {
  return nlohmann::json{
      {"motion",
       {{"frames", motion.frames},
        {"fps", motion.fps},
        {"harmonics", motion.harmonics},
        {"max_frequency_hz", motion.max_frequency_hz},
        {"amplitude", motion.amplitude},
        {"root_gain", motion.root_gain},
        {"shape_range", motion.shape_range},
        {"cam_s_base", motion.cam_s_base},
        {"cam_s_wobble", motion.cam_s_wobble},
        {"cam_t_wobble", motion.cam_t_wobble}}},
      {"feature",
       {{"feature_dim", feature.feature_dim},
        {"noise", feature.noise},
        {"outlier_prob", feature.outlier_prob},
        {"outlier_factor", feature.outlier_factor}}},
      {"train_sequences", train_sequences},
      {"eval_sequences", eval_sequences}};
}

DatasetConfig DatasetConfig::from_json(const nlohmann::json& j) {
  DatasetConfig c;
  const auto& m = j.at("motion");
  c.motion.frames = m.at("frames").get<int>();
  c.motion.fps = m.at("fps").get<double>();
  c.motion.harmonics = m.at("harmonics").get<int>();
  c.motion.max_frequency_hz = m.at("max_frequency_hz").get<double>();
  c.motion.amplitude = m.at("amplitude").get<double>();
  c.motion.root_gain = m.at("root_gain").get<double>();
  c.motion.shape_range = m.at("shape_range").get<double>();
  c.motion.cam_s_base = m.at("cam_s_base").get<double>();
  c.motion.cam_s_wobble = m.at("cam_s_wobble").get<double>();
  c.motion.cam_t_wobble = m.at("cam_t_wobble").get<double>();
  const auto& f = j.at("feature");
  c.feature.feature_dim = f.at("feature_dim").get<int>();
  c.feature.noise = f.at("noise").get<double>();
  c.feature.outlier_prob = f.at("outlier_prob").get<double>();
  c.feature.outlier_factor = f.at("outlier_factor").get<double>();
  c.train_sequences = j.at("train_sequences").get<int>();
  c.eval_sequences = j.at("eval_sequences").get<int>();
  return c;
}

namespace {

// Seed streams: 0 feeds the feature encoder, then two per sequence (motion,
// feature noise) in train-then-eval order.
enum : std::uint64_t { kEncoderStream = 0, kSequenceBase = 1 };

}  // namespace

Dataset Dataset::generate(const body::BodyModel& model, const DatasetConfig& cfg,
                          std::uint64_t master_seed) {
  cfg.validate();
  Dataset d(model);
  d.cfg_ = cfg;
  d.master_seed_ = master_seed;
  const int param_dim = body::params_dim(model.joint_count(), model.shape_dim());
  d.encoder_ = FeatureEncoder::create(param_dim, cfg.feature.feature_dim,
                                      derive_seed(master_seed, kEncoderStream));

  auto make_split = [&](int count, int base_index, const char* prefix) {
    std::vector<SequenceData> split;
    split.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
      const std::uint64_t stream = kSequenceBase + 2ull * (base_index + k);
      SequenceData s;
      s.motion = generate_motion(model, cfg.motion, derive_seed(master_seed, stream),
                                 std::string(prefix) + std::to_string(k));
      s.features = encode_features(s.motion, d.encoder_, cfg.feature,
                                   derive_seed(master_seed, stream + 1));
      split.push_back(std::move(s));
    }
    return split;
  };
  d.train_ = make_split(cfg.train_sequences, 0, "train-");
  d.eval_ = make_split(cfg.eval_sequences, cfg.train_sequences, "eval-");

  const int raw_dim = body::raw6d_dim(model.joint_count(), model.shape_dim());
  Vec mean = Vec::Zero(raw_dim);
  long frames = 0;
  for (const SequenceData& s : d.train_)
    for (const body::BodyParams& p : s.motion.params) {
      mean += encode_raw(p);
      ++frames;
    }
  d.mean_raw_ = mean / static_cast<double>(frames);
  return d;
}

namespace {

constexpr int kFormatVersion = 1;

void append_frame(std::vector<double>& payload, const body::BodyParams& p,
                  const Mat& joints, const Mat& vertices, const Mat& features,
                  int t) {
  const Vec flat = p.flatten();
  payload.insert(payload.end(), flat.data(), flat.data() + flat.size());
  payload.insert(payload.end(), joints.data(), joints.data() + joints.size());
  payload.insert(payload.end(), vertices.data(), vertices.data() + vertices.size());
  const Vec col = features.col(t);
  payload.insert(payload.end(), col.data(), col.data() + col.size());
}

}  // namespace

void Dataset::save(const std::string& path) const {
  nlohmann::json seq_table = nlohmann::json::array();
  std::vector<double> payload;

  const int J = model_.joint_count();
  const int V = model_.vertex_count();
  const int B = model_.shape_dim();
  const int record =
      body::params_dim(J, B) + 3 * J + 3 * V + cfg_.feature.feature_dim;

  auto dump_split = [&](const std::vector<SequenceData>& split, const char* name) {
    for (const SequenceData& s : split) {
      seq_table.push_back({{"id", s.motion.id},
                           {"split", name},
                           {"frames", s.motion.frames()},
                           {"offset", payload.size()}});
      for (int t = 0; t < s.motion.frames(); ++t)
        append_frame(payload, s.motion.params[static_cast<std::size_t>(t)],
                     s.motion.joints[static_cast<std::size_t>(t)],
                     s.motion.vertices[static_cast<std::size_t>(t)], s.features, t);
    }
  };
  dump_split(train_, "train");
  dump_split(eval_, "eval");

  const std::size_t mean_offset = payload.size();
  payload.insert(payload.end(), mean_raw_.data(), mean_raw_.data() + mean_raw_.size());
  auto dump_mat = [&](const Mat& m) {
    const std::size_t off = payload.size();
    payload.insert(payload.end(), m.data(), m.data() + m.size());
    return off;
  };
  const std::size_t w1_off = dump_mat(encoder_.w1());
  const std::size_t b1_off = dump_mat(encoder_.b1());
  const std::size_t w2_off = dump_mat(encoder_.w2());
  const std::size_t b2_off = dump_mat(encoder_.b2());

  nlohmann::json header{
      {"kind", "dataset"},
      {"version", kFormatVersion},
      {"master_seed", master_seed_},
      {"fps", cfg_.motion.fps},
      {"feature_dim", cfg_.feature.feature_dim},
      {"joints", J},
      {"shape_dim", B},
      {"vertex_count", V},
      {"frame_record", {"params", "joints", "vertices", "features"}},
      {"record_doubles", record},
      {"config", cfg_.to_json()},
      {"model", nlohmann::json::parse(model_.to_json_text())},
      {"mean_raw_offset", mean_offset},
      {"encoder",
       {{"hidden", encoder_.w1().rows()},
        {"w1_offset", w1_off},
        {"b1_offset", b1_off},
        {"w2_offset", w2_off},
        {"b2_offset", b2_off}}},
      {"sequences", std::move(seq_table)}};
  io::write_container(path, header, payload);
}

Dataset Dataset::load(const std::string& path) {
  io::Container c = io::read_container(path);
  const nlohmann::json& h = c.header;
  if (h.value("kind", "") != "dataset")
    throw std::runtime_error(path + ": not a dataset container");
  if (h.at("version").get<int>() != kFormatVersion)
    throw std::runtime_error(path + ": unsupported dataset version");

  Dataset d(body::BodyModel::from_json_text(h.at("model").dump()));
  d.cfg_ = DatasetConfig::from_json(h.at("config"));
  d.master_seed_ = h.at("master_seed").get<std::uint64_t>();

  const int J = h.at("joints").get<int>();
  const int B = h.at("shape_dim").get<int>();
  const int V = h.at("vertex_count").get<int>();
  const int df = h.at("feature_dim").get<int>();
  if (J != d.model_.joint_count() || B != d.model_.shape_dim() ||
      V != d.model_.vertex_count())
    throw std::runtime_error(path + ": header dims disagree with embedded model");
  const int param_dim = body::params_dim(J, B);
  const int record = param_dim + 3 * J + 3 * V + df;
  if (h.at("record_doubles").get<int>() != record)
    throw std::runtime_error(path + ": unexpected frame record size");

  auto read_mat = [&](std::size_t off, Eigen::Index rows, Eigen::Index cols) {
    if (off + static_cast<std::size_t>(rows * cols) > c.payload.size())
      throw std::runtime_error(path + ": payload section out of range");
    return Mat(Eigen::Map<const Mat>(c.payload.data() + off, rows, cols));
  };

  const int raw_dim = body::raw6d_dim(J, B);
  d.mean_raw_ =
      read_mat(h.at("mean_raw_offset").get<std::size_t>(), raw_dim, 1).col(0);
  const auto& enc = h.at("encoder");
  const auto hidden = enc.at("hidden").get<Eigen::Index>();
  d.encoder_ = FeatureEncoder::from_weights(
      read_mat(enc.at("w1_offset").get<std::size_t>(), hidden, param_dim),
      read_mat(enc.at("b1_offset").get<std::size_t>(), hidden, 1).col(0),
      read_mat(enc.at("w2_offset").get<std::size_t>(), df, hidden),
      read_mat(enc.at("b2_offset").get<std::size_t>(), df, 1).col(0));

  for (const auto& e : h.at("sequences")) {
    SequenceData s;
    s.motion.id = e.at("id").get<std::string>();
    s.motion.fps = d.cfg_.motion.fps;
    const int frames = e.at("frames").get<int>();
    std::size_t off = e.at("offset").get<std::size_t>();
    s.features.resize(df, frames);
    for (int t = 0; t < frames; ++t) {
      const Vec flat = read_mat(off, param_dim, 1).col(0);
      s.motion.params.push_back(body::BodyParams::unflatten(flat, J, B));
      off += static_cast<std::size_t>(param_dim);
      s.motion.joints.push_back(read_mat(off, 3, J));
      off += static_cast<std::size_t>(3 * J);
      s.motion.vertices.push_back(read_mat(off, 3, V));
      off += static_cast<std::size_t>(3 * V);
      s.features.col(t) = read_mat(off, df, 1).col(0);
      off += static_cast<std::size_t>(df);
    }
    if (e.at("split").get<std::string>() == "train")
      d.train_.push_back(std::move(s));
    else
      d.eval_.push_back(std::move(s));
  }
  if (static_cast<int>(d.train_.size()) != d.cfg_.train_sequences ||
      static_cast<int>(d.eval_.size()) != d.cfg_.eval_sequences)
    throw std::runtime_error(path + ": sequence table disagrees with config");
  return d;
}

std::vector<SequenceWindow> Dataset::windows(const std::vector<SequenceData>& split,
                                             int window, int stride) const {
  std::vector<SequenceWindow> out;
  for (std::size_t k = 0; k < split.size(); ++k) {
    auto w = make_windows(split[k].motion.frames(), window, stride,
                          static_cast<int>(k));
    out.insert(out.end(), w.begin(), w.end());
  }
  return out;
}

}  // namespace tempose
