// SPDX-License-Identifier: Apache-2.0

#include "tempose/ablation.hpp"

#include "tempose/evaluator.hpp"
#include "tempose/trainer.hpp"

#include <cmath>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace tempose {

RunConfig AblationVariant::apply(RunConfig base) const {
  base.network.temporal.use_residual = use_residual;
  base.network.temporal.poseforecast_enabled = poseforecast;
  base.network.temporal.poseforecast_includes_current = includes_current;
  base.loss.supervision_target = supervision;
  return base;
}

std::vector<AblationVariant> core_variants() {
  return {
      {"forecast", false, true, false, SupervisionTarget::current},
      {"no_forecast", false, false, false, SupervisionTarget::current},
      {"residual_forecast", true, true, false, SupervisionTarget::current},
      {"residual_no_forecast", true, false, false, SupervisionTarget::current},
      {"forecast_with_current", false, true, true, SupervisionTarget::current},
  };
}

std::vector<AblationVariant> supervision_variants() {
  return {
      {"sup_adjacent", false, true, false, SupervisionTarget::adjacent},
      {"sup_none", false, true, false, SupervisionTarget::none},
  };
}

namespace {

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0;
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0;
  const double m = mean_of(v);
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

double VariantResult::mean_pa() const { return mean_of(pa_mpjpe_mm); }
double VariantResult::sd_pa() const { return sd_of(pa_mpjpe_mm); }
double VariantResult::mean_accel() const { return mean_of(accel_err_mm_s2); }
double VariantResult::sd_accel() const { return sd_of(accel_err_mm_s2); }

const VariantResult* AblationResult::find(const std::string& name) const {
  for (const VariantResult& r : rows)
    if (r.name == name) return &r;
  return nullptr;
}

std::string AblationResult::to_table() const {
  std::ostringstream os;
  os.precision(4);
  os << std::fixed;
  os << "variant\tseeds\tpa_mpjpe_mm\tsd\taccel_err_mm_s2\tsd\tstatus\n";
  for (const VariantResult& r : rows) {
    os << r.name << "\t" << r.pa_mpjpe_mm.size() << "\t";
    if (r.failed)
      os << "-\t-\t-\t-\tFAILED: " << r.error << "\n";
    else
      os << r.mean_pa() << "\t" << r.sd_pa() << "\t" << r.mean_accel() << "\t"
         << r.sd_accel() << "\tok\n";
  }
  return os.str();
}

nlohmann::json AblationResult::to_json() const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (const VariantResult& r : rows)
    rows_json.push_back({{"name", r.name},
                         {"pa_mpjpe_mm", r.pa_mpjpe_mm},
                         {"accel_err_mm_s2", r.accel_err_mm_s2},
                         {"mpjpe_mm", r.mpjpe_mm},
                         {"mean_pa_mpjpe_mm", r.mean_pa()},
                         {"sd_pa_mpjpe_mm", r.sd_pa()},
                         {"mean_accel_err_mm_s2", r.mean_accel()},
                         {"sd_accel_err_mm_s2", r.sd_accel()},
                         {"failed", r.failed},
                         {"error", r.error}});
  return nlohmann::json{{"seeds", seeds}, {"rows", std::move(rows_json)}};
}

AblationResult ablate(const RunConfig& base, const Dataset& data,
                      const std::vector<std::uint64_t>& seeds,
                      const std::vector<AblationVariant>& variants,
                      int parallel,
                      const std::function<void(const std::string&)>& progress) {
  if (seeds.empty()) throw std::invalid_argument("ablate: empty seed list");
  if (variants.empty()) throw std::invalid_argument("ablate: no variants");
  if (parallel < 1) throw std::invalid_argument("ablate: parallel < 1");

  AblationResult result;
  result.seeds = seeds;
  result.rows.resize(variants.size());
  for (std::size_t v = 0; v < variants.size(); ++v) {
    result.rows[v].name = variants[v].name;
    result.rows[v].pa_mpjpe_mm.assign(seeds.size(), 0.0);
    result.rows[v].accel_err_mm_s2.assign(seeds.size(), 0.0);
    result.rows[v].mpjpe_mm.assign(seeds.size(), 0.0);
  }

  // Results land at the seed's index so parallel completion order cannot
  // permute the per-seed columns.
  struct Job {
    std::size_t variant;
    std::size_t seed_index;
  };
  std::vector<Job> jobs;
  for (std::size_t v = 0; v < variants.size(); ++v)
    for (std::size_t s = 0; s < seeds.size(); ++s) jobs.push_back({v, s});

  std::mutex mu;
  std::size_t next = 0;
  auto worker = [&]() {
    for (;;) {
      Job job;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (next >= jobs.size()) return;
        job = jobs[next++];
      }
      const AblationVariant& variant = variants[job.variant];
      const std::uint64_t seed = seeds[job.seed_index];
      RunConfig cfg = variant.apply(base);
      cfg.seed = seed;
      std::string note;
      try {
        TrainResult tr = train(cfg, data);
        Network net = tr.best.instantiate();
        EvalOutput ev = evaluate(net, data, data.eval_split());
        std::lock_guard<std::mutex> lock(mu);
        VariantResult& row = result.rows[job.variant];
        row.pa_mpjpe_mm[job.seed_index] = ev.report.pa_mpjpe_mm;
        row.accel_err_mm_s2[job.seed_index] = ev.report.accel_err_mm_s2;
        row.mpjpe_mm[job.seed_index] = ev.report.mpjpe_mm;
        note = variant.name + " seed " + std::to_string(seed) +
               ": pa_mpjpe_mm=" + std::to_string(ev.report.pa_mpjpe_mm) +
               " accel_err_mm_s2=" + std::to_string(ev.report.accel_err_mm_s2);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(mu);
        VariantResult& row = result.rows[job.variant];
        row.failed = true;
        row.error = e.what();
        note = variant.name + " seed " + std::to_string(seed) +
               ": FAILED: " + e.what();
      }
      if (progress) {
        std::lock_guard<std::mutex> lock(mu);
        progress(note);
      }
    }
  };

  if (parallel == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < parallel; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  return result;
}

}  // namespace tempose
