// SPDX-License-Identifier: Apache-2.0

#include "tempose/gradcheck.hpp"

#include "tempose/body_model.hpp"
#include "tempose/gru.hpp"
#include "tempose/loss.hpp"
#include "tempose/network.hpp"
#include "tempose/regressor.hpp"
#include "tempose/rotations.hpp"
#include "tempose/temporal.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace tempose {

GradCheckResult check_problem(GradProblem& problem, std::mt19937_64& rng,
                              double eps, double tol, int entries_per_leaf,
                              double denom_floor) {
  std::vector<Mat> analytic;
  double objective_scale = 1.0;
  {
    Tape tape;
    Var y = problem.forward();
    if (y.size() != 1)
      throw std::invalid_argument("check_problem: forward must produce a scalar");
    objective_scale = std::max(1.0, std::abs(y.scalar_value()));
    tape.backward(y);
    analytic.reserve(problem.leaves.size());
    for (Var& leaf : problem.leaves) {
      if (leaf.grad().size() == 0)
        analytic.push_back(Mat::Zero(leaf.rows(), leaf.cols()));
      else
        analytic.push_back(leaf.grad());
      leaf.zero_grad();
    }
  }

  auto value_at = [&]() {
    Tape tape;
    return problem.forward().scalar_value();
  };

  GradCheckResult res;
  res.pass = true;
  for (std::size_t li = 0; li < problem.leaves.size(); ++li) {
    Var& leaf = problem.leaves[li];
    const Eigen::Index size = leaf.size();
    std::vector<Eigen::Index> picks;
    if (size <= entries_per_leaf) {
      for (Eigen::Index i = 0; i < size; ++i) picks.push_back(i);
    } else {
      std::uniform_int_distribution<Eigen::Index> dist(0, size - 1);
      while (static_cast<int>(picks.size()) < entries_per_leaf) {
        Eigen::Index p = dist(rng);
        if (std::find(picks.begin(), picks.end(), p) == picks.end())
          picks.push_back(p);
      }
    }
    for (Eigen::Index p : picks) {
      double* entry = leaf.mutable_value().data() + p;
      const double saved = *entry;
      *entry = saved + eps;
      const double f_plus = value_at();
      *entry = saved - eps;
      const double f_minus = value_at();
      *entry = saved;
      const double fd = (f_plus - f_minus) / (2.0 * eps);
      const double ad = analytic[li].data()[p];
      const double abs_err = std::abs(ad - fd);
      // The floor scales with the objective so finite-difference roundoff
      // (~|f| * machine_eps / eps) cannot swamp near-zero gradient entries.
      const double rel = abs_err / std::max({denom_floor * objective_scale,
                                             std::abs(ad), std::abs(fd)});
      res.max_abs_err = std::max(res.max_abs_err, abs_err);
      res.max_rel_err = std::max(res.max_rel_err, rel);
      res.entries_checked += 1;
      if (rel > tol) res.pass = false;
    }
  }
  return res;
}

namespace {

Var rand_leaf(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c,
              double scale = 1.0, double offset = 0.0) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Mat m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = scale * dist(rng) + offset;
  return Var::leaf(m, true);
}

// Entries bounded away from zero (for divide and relu kinks).
Var rand_leaf_away(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c,
                   double lo = 0.2, double hi = 1.2) {
  std::uniform_real_distribution<double> mag(lo, hi);
  std::bernoulli_distribution sign(0.5);
  Mat m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i)
      m(i, j) = (sign(rng) ? 1.0 : -1.0) * mag(rng);
  return Var::leaf(m, true);
}

body::BodyModel tiny_model(std::mt19937_64& rng, int joints = 4, int shape_dim = 2,
                           int vertices = 3) {
  std::uniform_real_distribution<double> dist(-0.2, 0.2);
  std::vector<body::Joint> js;
  for (int j = 0; j < joints; ++j) {
    body::Joint joint;
    joint.name = "j" + std::to_string(j);
    joint.parent = j - 1;
    joint.rest_offset = rot::Vec3(dist(rng), 0.25 + std::abs(dist(rng)), dist(rng));
    joint.shape_basis = Mat::Zero(3, shape_dim);
    for (int b = 0; b < shape_dim; ++b)
      joint.shape_basis.col(b) = rot::Vec3(dist(rng), dist(rng), dist(rng)) * 0.1;
    js.push_back(std::move(joint));
  }
  std::vector<body::Vertex> vs;
  std::uniform_int_distribution<int> pick(0, joints - 1);
  for (int v = 0; v < vertices; ++v)
    vs.push_back({pick(rng), rot::Vec3(dist(rng), dist(rng), dist(rng))});
  return body::BodyModel(std::move(js), std::move(vs), {0, joints - 1});
}

body::BodyParams random_params(std::mt19937_64& rng, int joints, int shape_dim) {
  std::uniform_real_distribution<double> dist(-0.8, 0.8);
  body::BodyParams p;
  p.theta.resize(3, joints);
  for (int j = 0; j < joints; ++j)
    p.theta.col(j) = rot::Vec3(dist(rng), dist(rng), dist(rng));
  p.beta.resize(shape_dim);
  for (int b = 0; b < shape_dim; ++b) p.beta(b) = dist(rng);
  p.cam_s = 1.0 + 0.2 * dist(rng);
  p.cam_t = Eigen::Vector2d(dist(rng), dist(rng));
  return p;
}

TemporalConfig tiny_temporal() {
  TemporalConfig tc;
  tc.window = 6;
  tc.feature_dim = 12;
  tc.gru_hidden = 6;
  tc.forecast_hidden = 6;
  tc.bottleneck = 3;
  tc.attention_hidden = {4};
  return tc;
}

struct CaseDef {
  std::string name;
  std::function<GradProblem(std::mt19937_64&)> make;
};

std::vector<CaseDef> suite_cases() {
  std::vector<CaseDef> cases;
  auto add = [&](std::string name,
                 std::function<GradProblem(std::mt19937_64&)> make) {
    cases.push_back({std::move(name), std::move(make)});
  };

  add("add_sub_neg", [](std::mt19937_64& rng) {
    GradProblem p;
    p.leaves = {rand_leaf(rng, 3, 4), rand_leaf(rng, 3, 4), rand_leaf(rng, 3, 4)};
    p.forward = [l = p.leaves]() { return sum(l[0] + l[1] - (-l[2])); };
    return p;
  });
  add("elementwise_mul", [](std::mt19937_64& rng) {
    GradProblem p;
    p.leaves = {rand_leaf(rng, 4, 3), rand_leaf(rng, 4, 3)};
    p.forward = [l = p.leaves]() { return sum(mul(l[0], l[1])); };
    return p;
  });
  add("elementwise_divide", [](std::mt19937_64& rng) {
    GradProblem p;
    p.leaves = {rand_leaf(rng, 4, 3), rand_leaf_away(rng, 4, 3, 0.4, 1.5)};
    p.forward = [l = p.leaves]() { return sum(divide(l[0], l[1])); };
    return p;
  });
  add("matmul", [](std::mt19937_64& rng) {
    GradProblem p;
    p.leaves = {rand_leaf(rng, 3, 5), rand_leaf(rng, 5, 2)};
    p.forward = [l = p.leaves]() { return sum(l[0] * l[1]); };
    return p;
  });
  add("scalar_scale_shift", [](std::mt19937_64& rng) {
    GradProblem p;
    p.leaves = {rand_leaf(rng, 3, 3), rand_leaf(rng, 1, 1)};
    p.forward = [l = p.leaves]() {
      return sum(cadd(cmul(scale(l[0], l[1]), 0.7), 0.3));
    };
    return p;
  });
  add("sigmoid", [](std::mt19937_64& rng) {
    GradProblem p;
    p.leaves = {rand_leaf(rng, 4, 4, 2.0)};
    p.forward = [l = p.leaves]() { return sum(sigmoid(l[0])); };
    return p;
  });
  add("tanh", [](std::mt19937_64& rng) {
    GradProblem p;
    p.leaves = {rand_leaf(rng, 4, 4, 2.0)};
    p.forward = [l = p.leaves]() { return sum(tanh(l[0])); };
    return p;
  });
  add("relu", [](std::mt19937_64& rng) {
    GradProblem p;
    p.leaves = {rand_leaf_away(rng, 4, 4)};
    p.forward = [l = p.leaves]() { return sum(relu(l[0])); };
    return p;
  });
  add("softmax_columns", [](std::mt19937_64& rng) {
    GradProblem p;
    p.leaves = {rand_leaf(rng, 5, 3, 2.0), rand_leaf(rng, 5, 3)};
    p.forward = [l = p.leaves]() { return sum(mul(softmax(l[0]), l[1])); };
    return p;
  });
  add("concat_rows_cols", [](std::mt19937_64& rng) {
    GradProblem p;
    p.leaves = {rand_leaf(rng, 2, 3), rand_leaf(rng, 4, 3), rand_leaf(rng, 6, 2)};
    p.forward = [l = p.leaves]() {
      std::vector<Var> rows{l[0], l[1]};
      std::vector<Var> cols{concat_rows(rows), l[2]};
      return squared_norm(concat_cols(cols));
    };
    return p;
  });
  add("block_and_slices", [](std::mt19937_64& rng) {
    GradProblem p;
    p.leaves = {rand_leaf(rng, 6, 6)};
    p.forward = [l = p.leaves]() {
      Var b = block(l[0], 1, 2, 3, 3);
      return sum(slice_rows(b, 0, 2)) + sum(slice_cols(l[0], 4, 2));
    };
    return p;
  });
  add("reshape_tile", [](std::mt19937_64& rng) {
    GradProblem p;
    p.leaves = {rand_leaf(rng, 4, 3), rand_leaf(rng, 4, 1)};
    p.forward = [l = p.leaves]() {
      return squared_norm(reshape(l[0], 6, 2)) + sum(tile_cols(l[1], 3));
    };
    return p;
  });
  add("column_broadcasts", [](std::mt19937_64& rng) {
    GradProblem p;
    p.leaves = {rand_leaf(rng, 4, 5), rand_leaf(rng, 4, 1), rand_leaf(rng, 1, 5)};
    p.forward = [l = p.leaves]() {
      return sum(colscale(add_colwise(l[0], l[1]), l[2])) +
             sum(sub_colwise(l[0], l[1]));
    };
    return p;
  });
  add("reductions", [](std::mt19937_64& rng) {
    GradProblem p;
    p.leaves = {rand_leaf(rng, 5, 4)};
    p.forward = [l = p.leaves]() {
      return sum(l[0]) + mean(l[0]) + squared_norm(l[0]);
    };
    return p;
  });
  add("rotation_sixd", [](std::mt19937_64& rng) {
    GradProblem p;
    Var r = rand_leaf(rng, 6, 1);
    // keep away from the degenerate (parallel/zero) region
    r.mutable_value()(0, 0) += r.mutable_value()(0, 0) >= 0 ? 1.0 : -1.0;
    r.mutable_value()(4, 0) += r.mutable_value()(4, 0) >= 0 ? 1.0 : -1.0;
    p.leaves = {r};
    Var w = rand_leaf(rng, 3, 3);
    p.leaves.push_back(w);
    p.forward = [r, w]() { return sum(mul(rot::rot6d_to_matrix(r), w)); };
    return p;
  });
  add("gru_step", [](std::mt19937_64& rng) {
    GradProblem p;
    GruCell cell = GruCell::create(5, 4, rng);
    Var x = rand_leaf(rng, 5, 2);
    Var h = rand_leaf(rng, 4, 2);
    cell.collect_params(p.leaves);
    p.leaves.push_back(x);
    p.leaves.push_back(h);
    p.forward = [cell, x, h]() { return squared_norm(cell.step(x, h)); };
    return p;
  });
  add("gru_rollout", [](std::mt19937_64& rng) {
    GradProblem p;
    GruCell cell = GruCell::create(4, 3, rng);
    std::vector<Var> xs;
    for (int t = 0; t < 5; ++t) xs.push_back(rand_leaf(rng, 4, 2));
    cell.collect_params(p.leaves);
    for (const Var& x : xs) p.leaves.push_back(x);
    p.forward = [cell, xs]() { return squared_norm(cell.rollout(xs, 2)); };
    return p;
  });
  add("window_encoders", [](std::mt19937_64& rng) {
    GradProblem p;
    TemporalConfig tc = tiny_temporal();
    TemporalEncoder enc = TemporalEncoder::create(tc, rng);
    std::vector<Var> frames;
    for (int t = 0; t < tc.window; ++t)
      frames.push_back(rand_leaf(rng, tc.feature_dim, 2));
    enc.collect_params(p.leaves);
    for (const Var& f : frames) p.leaves.push_back(f);
    p.forward = [enc, frames]() {
      auto o = enc.encode_window(frames);
      return squared_norm(o.all) + squared_norm(o.past) + squared_norm(o.future);
    };
    return p;
  });
  add("attention_integration", [](std::mt19937_64& rng) {
    GradProblem p;
    TemporalConfig tc = tiny_temporal();
    IntegrationHead head = IntegrationHead::create(tc, rng);
    Var g_all = rand_leaf(rng, tc.all_dim(), 2);
    Var g_past = rand_leaf(rng, tc.forecast_hidden, 2);
    Var g_future = rand_leaf(rng, tc.forecast_hidden, 2);
    head.collect_params(p.leaves);
    p.leaves.push_back(g_all);
    p.leaves.push_back(g_past);
    p.leaves.push_back(g_future);
    p.forward = [head, g_all, g_past, g_future]() {
      TemporalFeatures f = head.integrate(g_all, g_past, g_future);
      return squared_norm(f.g_int) + squared_norm(f.attention);
    };
    return p;
  });
  add("iterative_regressor", [](std::mt19937_64& rng) {
    GradProblem p;
    RegressorConfig rc;
    rc.feature_dim = 10;
    rc.joints = 3;
    rc.shape_dim = 2;
    rc.n_iter = 2;
    rc.hidden = {16};
    Vec mean = Vec::Zero(rc.raw_dim());
    for (int j = 0; j < rc.joints; ++j) {
      mean(6 * j) = 1;      // identity rotation in 6D form
      mean(6 * j + 4) = 1;
    }
    Regressor reg = Regressor::create(rc, mean, rng);
    Var f = rand_leaf(rng, rc.feature_dim, 2);
    reg.collect_params(p.leaves);
    p.leaves.push_back(f);
    p.forward = [reg, f]() { return squared_norm(reg.regress(f)); };
    return p;
  });
  add("forward_kinematics", [](std::mt19937_64& rng) {
    GradProblem p;
    body::BodyModel model = tiny_model(rng);
    std::vector<Var> raw6;
    for (int j = 0; j < model.joint_count(); ++j) {
      Var r = rand_leaf(rng, 6, 1);
      r.mutable_value()(0, 0) += r.mutable_value()(0, 0) >= 0 ? 1.0 : -1.0;
      r.mutable_value()(4, 0) += r.mutable_value()(4, 0) >= 0 ? 1.0 : -1.0;
      raw6.push_back(r);
      p.leaves.push_back(r);
    }
    Var beta = rand_leaf(rng, model.shape_dim(), 1);
    Var s = rand_leaf(rng, 1, 1, 0.2, 1.0);
    Var t = rand_leaf(rng, 2, 1);
    p.leaves.push_back(beta);
    p.leaves.push_back(s);
    p.leaves.push_back(t);
    p.forward = [model, raw6, beta, s, t]() {
      std::vector<Var> rots;
      for (const Var& r : raw6) rots.push_back(rot::rot6d_to_matrix(r));
      body::FkVars fk = model.fk_graph(rots, beta, true);
      Var p2d = body::project_weak_perspective(fk.joints, s, t);
      return squared_norm(fk.joints) + squared_norm(fk.vertices) +
             squared_norm(p2d);
    };
    return p;
  });
  add("window_loss_chain", [](std::mt19937_64& rng) {
    GradProblem p;
    NetworkConfig nc;
    nc.temporal = tiny_temporal();
    nc.joints = 4;
    nc.shape_dim = 2;
    nc.regressor_iters = 2;
    nc.regressor_hidden = {24};
    body::BodyModel model = tiny_model(rng, nc.joints, nc.shape_dim);
    body::BodyParams mean_pose = random_params(rng, nc.joints, nc.shape_dim);
    Network net = Network::create(nc, encode_raw(mean_pose), rng());
    WindowGroundTruth gt;
    gt.current = random_params(rng, nc.joints, nc.shape_dim);
    gt.past_adjacent = random_params(rng, nc.joints, nc.shape_dim);
    gt.future_adjacent = random_params(rng, nc.joints, nc.shape_dim);
    LossWeights w;
    w.supervision_target = SupervisionTarget::adjacent;
    std::vector<Var> frames;
    for (int t = 0; t < nc.temporal.window; ++t)
      frames.push_back(rand_leaf(rng, nc.temporal.feature_dim, 1));
    p.leaves = net.parameters();
    for (const Var& f : frames) p.leaves.push_back(f);
    p.forward = [net, frames, model, gt, w]() {
      BranchOutputs outs = net.forward(frames);
      return window_loss(outs, 0, model, gt, w);
    };
    return p;
  });
  return cases;
}

}  // namespace

SuiteReport run_gradient_suite(std::uint64_t seed, int instances, double tol) {
  const auto t0 = std::chrono::steady_clock::now();
  SuiteReport report;
  report.all_pass = true;
  std::mt19937_64 rng(seed);
  for (const CaseDef& def : suite_cases()) {
    SuiteCase sc;
    sc.name = def.name;
    sc.pass = true;
    for (int i = 0; i < instances; ++i) {
      GradProblem problem = def.make(rng);
      GradCheckResult r = check_problem(problem, rng, 1e-5, tol);
      sc.max_rel_err = std::max(sc.max_rel_err, r.max_rel_err);
      sc.pass = sc.pass && r.pass;
      sc.instances += 1;
    }
    report.all_pass = report.all_pass && sc.pass;
    report.cases.push_back(std::move(sc));
  }
  report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

std::string SuiteReport::summary() const {
  std::ostringstream os;
  for (const SuiteCase& c : cases)
    os << (c.pass ? "PASS" : "FAIL") << "  " << c.name << "  max_rel_err="
       << c.max_rel_err << "  instances=" << c.instances << "\n";
  os << (all_pass ? "all gradient checks passed" : "GRADIENT CHECK FAILURES") << " ("
     << seconds << " s)\n";
  return os.str();
}

}  // namespace tempose
