// SPDX-License-Identifier: Apache-2.0
//
// Microbenchmarks for the hot paths: GRU rollout, window encoding, a full
// training step (forward + loss + backward), forward kinematics, Procrustes
// alignment, and the on-disk tensor container.

#include "tempose/body_model.hpp"
#include "tempose/dataset.hpp"
#include "tempose/loss.hpp"
#include "tempose/metrics.hpp"
#include "tempose/network.hpp"
#include "tempose/serialize.hpp"
#include "tempose/tensor.hpp"

#include <benchmark/benchmark.h>

#include <cstdio>
#include <random>
#include <string>
#include <vector>

namespace {

using namespace tempose;

const body::BodyModel& bench_model() {
  static body::BodyModel model =
      body::BodyModel::load(std::string(TEMPOSE_SOURCE_DIR) + "/assets/body24.json");
  return model;
}

Dataset& bench_data() {
  static Dataset data = [] {
    DatasetConfig cfg;
    cfg.train_sequences = 4;
    cfg.eval_sequences = 2;
    cfg.motion.frames = 40;
    return Dataset::generate(bench_model(), cfg, 7);
  }();
  return data;
}

// One batched window stack: frames[t] is feature_dim x kBatch, columns are
// consecutive stride-1 windows of the first training sequence.
constexpr int kWindow = 16;
constexpr int kBatch = 16;

std::vector<Mat> batched_frames() {
  const auto& seq = bench_data().train()[0];
  std::vector<Mat> frames(kWindow);
  for (int t = 0; t < kWindow; ++t) {
    Mat f(seq.features.rows(), kBatch);
    for (int b = 0; b < kBatch; ++b) f.col(b) = seq.features.col(b + t);
    frames[t] = f;
  }
  return frames;
}

Network bench_network() {
  return Network::create(NetworkConfig{}, bench_data().mean_raw(), 11);
}

void BM_GruRollout(benchmark::State& state) {
  std::mt19937_64 rng(3);
  GruCell cell = GruCell::create(96, 48, rng);
  std::vector<Mat> raw = batched_frames();
  for (auto _ : state) {
    Tape tape;
    std::vector<Var> xs;
    xs.reserve(raw.size());
    for (const Mat& f : raw) xs.push_back(Var::constant(f));
    Var h = cell.rollout(xs, kBatch);
    benchmark::DoNotOptimize(h.value().sum());
  }
}
BENCHMARK(BM_GruRollout);

void BM_NetworkForward(benchmark::State& state) {
  Network net = bench_network();
  std::vector<Mat> raw = batched_frames();
  for (auto _ : state) {
    Tape tape;
    std::vector<Var> frames;
    frames.reserve(raw.size());
    for (const Mat& f : raw) frames.push_back(Var::constant(f));
    BranchOutputs out = net.forward(frames);
    benchmark::DoNotOptimize(out.raw_int.value().sum());
  }
}
BENCHMARK(BM_NetworkForward);

void BM_TrainStep(benchmark::State& state) {
  Network net = bench_network();
  std::vector<Mat> raw = batched_frames();
  const auto& seq = bench_data().train()[0];
  const int current = NetworkConfig{}.temporal.current_index();
  LossWeights w;
  for (auto _ : state) {
    Tape tape;
    std::vector<Var> frames;
    frames.reserve(raw.size());
    for (const Mat& f : raw) frames.push_back(Var::constant(f));
    BranchOutputs out = net.forward(frames);
    Var total = Var::scalar(0.0);
    for (int b = 0; b < kBatch; ++b) {
      WindowGroundTruth gt;
      gt.current = seq.motion.params[b + current];
      gt.past_adjacent = seq.motion.params[b + current - 1];
      gt.future_adjacent = seq.motion.params[b + current + 1];
      total = total + window_loss(out, b, bench_data().model(), gt, w);
    }
    tape.backward(total);
    benchmark::DoNotOptimize(total.value()(0, 0));
    for (Var& p : net.parameters()) p.zero_grad();
  }
}
BENCHMARK(BM_TrainStep);

void BM_ForwardKinematics(benchmark::State& state) {
  const auto& seq = bench_data().train()[0];
  const body::BodyParams& p = seq.motion.params[0];
  for (auto _ : state) {
    body::FkResult fk = bench_model().forward_kinematics(p);
    benchmark::DoNotOptimize(fk.joints.sum());
  }
}
BENCHMARK(BM_ForwardKinematics);

void BM_ProcrustesAlign(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  Mat gt(24, 3), pred(24, 3);
  for (int i = 0; i < gt.size(); ++i) {
    gt(i / 3, i % 3) = g(rng);
    pred(i / 3, i % 3) = g(rng);
  }
  for (auto _ : state) {
    ProcrustesResult r = procrustes_align(pred, gt);
    benchmark::DoNotOptimize(r.aligned.sum());
  }
}
BENCHMARK(BM_ProcrustesAlign);

void BM_ContainerRoundTrip(benchmark::State& state) {
  Network net = bench_network();
  std::vector<io::TensorRecord> tensors;
  for (const auto& [name, p] : net.named_parameters())
    tensors.push_back({name, p.value()});
  const std::string path =
      "/tmp/tempose_bench_container_" + std::to_string(::getpid()) + ".bin";
  for (auto _ : state) {
    io::write_tensors(path, nlohmann::json::object(), tensors);
    auto [meta, back] = io::read_tensors(path);
    benchmark::DoNotOptimize(back.size());
  }
  std::remove(path.c_str());
}
BENCHMARK(BM_ContainerRoundTrip);

}  // namespace

BENCHMARK_MAIN();
