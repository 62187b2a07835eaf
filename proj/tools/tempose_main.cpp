// SPDX-License-Identifier: Apache-2.0
//
// Command line front end: dataset generation, training, evaluation, the
// architecture comparison grid, prediction smoothing, the finite-difference
// gradient suite, and per-frame trace export. Every artifact-producing
// subcommand writes a manifest JSON beside its outputs.

#include "tempose/ablation.hpp"
#include "tempose/config.hpp"
#include "tempose/dataset.hpp"
#include "tempose/evaluator.hpp"
#include "tempose/gradcheck.hpp"
#include "tempose/smoothing.hpp"
#include "tempose/trainer.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace {

#ifndef TEMPOSE_VERSION
#define TEMPOSE_VERSION "0.0.0"
#endif

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
}

nlohmann::json base_manifest(const std::string& kind) {
  return nlohmann::json{{"kind", kind}, {"version", TEMPOSE_VERSION}};
}

const std::vector<tempose::SequenceData>& pick_split(const tempose::Dataset& data,
                                                     const std::string& split) {
  if (split == "train") return data.train();
  if (split == "eval") return data.eval_split();
  throw CLI::ValidationError("--split must be 'train' or 'eval'");
}

int cmd_gen_data(const std::string& out, const std::string& config_path,
                 const std::string& model_path, std::uint64_t seed) {
  tempose::body::BodyModel model = tempose::body::BodyModel::load(model_path);
  tempose::DatasetConfig cfg;
  if (!config_path.empty()) {
    std::ifstream f(config_path);
    if (!f) throw std::runtime_error("cannot read config: " + config_path);
    cfg = tempose::DatasetConfig::from_json(nlohmann::json::parse(f));
  }
  tempose::Dataset data = tempose::Dataset::generate(model, cfg, seed);
  data.save(out);
  nlohmann::json m = base_manifest("gen-data");
  m["dataset_config"] = cfg.to_json();
  m["seed"] = seed;
  m["model"] = model_path;
  m["out"] = out;
  write_text(out + ".manifest.json", m.dump(2) + "\n");
  std::cout << "wrote " << out << ": " << data.train().size() << " train / "
            << data.eval_split().size() << " eval sequences, feature_dim "
            << data.feature_dim() << "\n";
  return 0;
}

int cmd_train(const std::string& config_path, const std::string& data_path,
              const std::string& out, std::int64_t seed_override) {
  tempose::RunConfig cfg = config_path.empty() ? tempose::RunConfig::desk()
                                               : tempose::RunConfig::load(config_path);
  if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
  cfg.validate();
  tempose::Dataset data = tempose::Dataset::load(data_path);
  tempose::TrainResult result = tempose::train(cfg, data);
  result.best.save(out);
  write_text(out + ".log.tsv", tempose::format_log(result.log));
  tempose::write_manifest(out + ".manifest.json", cfg,
                          {{"kind", "train"},
                           {"version", TEMPOSE_VERSION},
                           {"seed", cfg.seed},
                           {"data", data_path},
                           {"best_epoch", result.best.epoch},
                           {"best_val_pa_mpjpe_mm", result.best.best_val_pa_mpjpe}});
  std::cout << tempose::format_log(result.log);
  std::cout << "best epoch " << result.best.epoch << ", validation PA-MPJPE "
            << result.best.best_val_pa_mpjpe << " mm -> " << out << "\n";
  return 0;
}

int cmd_eval(const std::string& ckpt_path, const std::string& data_path,
             const std::string& report_path, const std::string& pred_out,
             const std::string& split, bool oracle, int max_sequences) {
  tempose::Dataset data = tempose::Dataset::load(data_path);
  const auto& seqs = pick_split(data, split);
  tempose::EvalOptions opt;
  opt.max_sequences = max_sequences;

  tempose::PredictionSet preds;
  tempose::RunConfig cfg_echo = tempose::RunConfig::desk();
  if (oracle) {
    preds = tempose::oracle_predictions(data, seqs,
                                        cfg_echo.network.temporal.window, opt);
  } else {
    tempose::Checkpoint ckpt = tempose::Checkpoint::load(ckpt_path);
    cfg_echo = ckpt.config;
    tempose::Network net = ckpt.instantiate();
    preds = tempose::predict(net, data, seqs, opt);
  }
  tempose::EvalOutput out = tempose::score(preds, data, seqs);
  std::cout << tempose::to_table(out.rows, out.report) << "\n"
            << out.report.to_kv_text();
  if (!report_path.empty()) {
    write_text(report_path, out.report.to_json_text() + "\n");
    tempose::write_manifest(report_path + ".manifest.json", cfg_echo,
                            {{"kind", "eval"},
                             {"version", TEMPOSE_VERSION},
                             {"data", data_path},
                             {"checkpoint", oracle ? "(oracle)" : ckpt_path},
                             {"split", split}});
  }
  if (!pred_out.empty()) preds.save(pred_out);
  return 0;
}

int cmd_ablate(const std::string& config_path, const std::string& data_path,
               const std::string& out_prefix, const std::string& seeds_csv,
               int parallel, bool supervision) {
  tempose::RunConfig base = config_path.empty() ? tempose::RunConfig::desk()
                                                : tempose::RunConfig::load(config_path);
  base.validate();
  tempose::Dataset data = tempose::Dataset::load(data_path);

  std::vector<std::uint64_t> seeds;
  std::stringstream ss(seeds_csv);
  for (std::string tok; std::getline(ss, tok, ',');)
    if (!tok.empty()) seeds.push_back(std::stoull(tok));
  if (seeds.empty()) throw CLI::ValidationError("--seeds parsed to an empty list");

  std::vector<tempose::AblationVariant> variants = tempose::core_variants();
  if (supervision)
    for (const auto& v : tempose::supervision_variants()) variants.push_back(v);

  tempose::AblationResult result = tempose::ablate(
      base, data, seeds, variants, parallel,
      [](const std::string& msg) { std::cout << msg << "\n" << std::flush; });

  write_text(out_prefix + ".tsv", result.to_table());
  write_text(out_prefix + ".json", result.to_json().dump(2) + "\n");
  tempose::write_manifest(out_prefix + ".manifest.json", base,
                          {{"kind", "ablate"},
                           {"version", TEMPOSE_VERSION},
                           {"data", data_path},
                           {"seeds", seeds},
                           {"parallel", parallel}});
  std::cout << result.to_table();
  return 0;
}

int cmd_smooth(const std::string& pred_path, int window, const std::string& out,
               const std::string& data_path, const std::string& split) {
  tempose::PredictionSet preds = tempose::PredictionSet::load(pred_path);
  tempose::PredictionSet smoothed = tempose::smooth_predictions(preds, window);
  smoothed.save(out);
  std::cout << "smoothed " << preds.ids.size() << " sequences with window "
            << window << " -> " << out << "\n";
  if (!data_path.empty()) {
    tempose::Dataset data = tempose::Dataset::load(data_path);
    const auto& seqs = pick_split(data, split);
    tempose::MetricReport before = tempose::score(preds, data, seqs).report;
    tempose::MetricReport after = tempose::score(smoothed, data, seqs).report;
    std::cout << "accel_err_mm_s2 " << before.accel_err_mm_s2 << " -> "
              << after.accel_err_mm_s2 << "\n"
              << "pa_mpjpe_mm " << before.pa_mpjpe_mm << " -> "
              << after.pa_mpjpe_mm << "\n";
  }
  return 0;
}

int cmd_gradcheck(std::uint64_t seed, int instances, double tol) {
  tempose::SuiteReport report = tempose::run_gradient_suite(seed, instances, tol);
  std::cout << report.summary();
  return report.all_pass ? 0 : 2;
}

int cmd_export_plotdata(const std::string& data_path,
                        const std::vector<std::string>& pred_specs, bool oracle,
                        const std::string& split, const std::string& out) {
  tempose::Dataset data = tempose::Dataset::load(data_path);
  const auto& seqs = pick_split(data, split);

  std::ostringstream table;
  table << "method\tsequence\tframe\taccel_err_mm_frame2\taccel_err_mm_s2\n";
  const double fps2 = data.fps() * data.fps();
  auto emit = [&](const std::string& method, const tempose::PredictionSet& preds) {
    tempose::EvalOutput ev = tempose::score(preds, data, seqs);
    for (std::size_t s = 0; s < ev.accel_traces.size(); ++s)
      for (std::size_t k = 0; k < ev.accel_traces[s].size(); ++k) {
        // frame is 1-based; trace entry k sits at scored frame k+1
        const long frame = preds.first_frame[s] + static_cast<long>(k) + 2;
        const double a = ev.accel_traces[s][k];
        table << method << "\t" << preds.ids[s] << "\t" << frame << "\t" << a
              << "\t" << a * fps2 << "\n";
      }
  };

  int window_hint = tempose::RunConfig::desk().network.temporal.window;
  for (const std::string& spec : pred_specs) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos)
      throw CLI::ValidationError("--pred expects NAME=FILE, got '" + spec + "'");
    tempose::PredictionSet preds = tempose::PredictionSet::load(spec.substr(eq + 1));
    if (!preds.first_frame.empty()) window_hint = preds.first_frame[0] * 2 + 2;
    emit(spec.substr(0, eq), preds);
  }
  if (oracle)
    emit("ground-truth", tempose::oracle_predictions(data, seqs, window_hint));

  write_text(out, table.str());
  std::cout << "wrote " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"temporally consistent human pose recovery toolkit"};
  app.require_subcommand(1);

  std::string out, config_path, model_path = "assets/body24.json";
  std::uint64_t seed = 0;
  auto* gen = app.add_subcommand("gen-data", "generate a synthetic dataset");
  gen->add_option("--out", out, "output dataset file")->required();
  gen->add_option("--config", config_path, "dataset config JSON");
  gen->add_option("--model", model_path, "body model JSON");
  gen->add_option("--seed", seed, "master seed");

  std::string data_path, train_out;
  std::int64_t seed_override = -1;
  auto* tr = app.add_subcommand("train", "train a model");
  tr->add_option("--config", config_path, "run config JSON (defaults when omitted)");
  tr->add_option("--data", data_path, "dataset file")->required();
  tr->add_option("--out", train_out, "checkpoint output")->required();
  tr->add_option("--seed", seed_override, "seed override");

  std::string ckpt_path, report_path, pred_out, split = "eval";
  bool oracle = false;
  int max_sequences = 0;
  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint");
  ev->add_option("--checkpoint", ckpt_path, "checkpoint file");
  ev->add_option("--data", data_path, "dataset file")->required();
  ev->add_option("--report", report_path, "metric report JSON output");
  ev->add_option("--pred", pred_out, "also save predictions here");
  ev->add_option("--split", split, "train|eval (default eval)");
  ev->add_option("--max-sequences", max_sequences, "limit scored sequences");
  ev->add_flag("--oracle", oracle, "score ground truth against itself");

  std::string seeds_csv = "0,1,2";
  int parallel = 1;
  bool supervision = false;
  auto* ab = app.add_subcommand("ablate", "run the architecture comparison grid");
  ab->add_option("--config", config_path, "base run config JSON");
  ab->add_option("--data", data_path, "dataset file")->required();
  ab->add_option("--out", out, "output prefix (.tsv/.json/.manifest.json)")->required();
  ab->add_option("--seeds", seeds_csv, "comma separated seed list");
  ab->add_option("--parallel", parallel, "worker threads (default 1)");
  ab->add_flag("--supervision", supervision, "include supervision-target variants");

  std::string smooth_pred;
  int smooth_window = 5;
  auto* sm = app.add_subcommand("smooth", "slerp-average filter predictions");
  sm->add_option("--pred", smooth_pred, "predictions file")->required();
  sm->add_option("--window", smooth_window, "odd filter width");
  sm->add_option("--out", out, "smoothed predictions output")->required();
  sm->add_option("--data", data_path, "report metric change against this dataset");
  sm->add_option("--split", split, "train|eval (default eval)");

  int instances = 20;
  double tol = 1e-4;
  auto* gc = app.add_subcommand("gradcheck", "run the finite-difference suite");
  gc->add_option("--seed", seed, "suite seed");
  gc->add_option("--instances", instances, "instances per case");
  gc->add_option("--tol", tol, "relative-error tolerance");

  std::vector<std::string> pred_specs;
  auto* ex = app.add_subcommand("export-plotdata",
                                "per-frame acceleration-error traces");
  ex->add_option("--data", data_path, "dataset file")->required();
  ex->add_option("--pred", pred_specs, "NAME=FILE, repeatable");
  ex->add_flag("--oracle", oracle, "include the ground-truth-as-prediction trace");
  ex->add_option("--split", split, "train|eval (default eval)");
  ex->add_option("--out", out, "output TSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen_data(out, config_path, model_path, seed);
    if (tr->parsed()) return cmd_train(config_path, data_path, train_out, seed_override);
    if (ev->parsed())
      return cmd_eval(ckpt_path, data_path, report_path, pred_out, split, oracle,
                      max_sequences);
    if (ab->parsed())
      return cmd_ablate(config_path, data_path, out, seeds_csv, parallel, supervision);
    if (sm->parsed())
      return cmd_smooth(smooth_pred, smooth_window, out, data_path, split);
    if (gc->parsed()) return cmd_gradcheck(seed, instances, tol);
    if (ex->parsed())
      return cmd_export_plotdata(data_path, pred_specs, oracle, split, out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
