// SPDX-License-Identifier: Apache-2.0
//
// Central finite-difference verification of the reverse-mode gradients. The
// suite covers every differentiable op and the full chain from features to
// the training loss, each on many random instances.

#pragma once

#include "tempose/tensor.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace tempose {

// A differentiable scalar problem: `forward` rebuilds the graph from the
// current leaf values every call.
struct GradProblem {
  std::vector<Var> leaves;
  std::function<Var()> forward;
};

struct GradCheckResult {
  double max_rel_err = 0;
  double max_abs_err = 0;
  long entries_checked = 0;
  bool pass = false;
};

// Analytic gradients vs central differences on up to entries_per_leaf
// randomly chosen entries of every leaf. Relative error uses
// |ad - fd| / max(floor, |ad|, |fd|).
GradCheckResult check_problem(GradProblem& problem, std::mt19937_64& rng,
                              double eps = 1e-5, double tol = 1e-4,
                              int entries_per_leaf = 12,
                              double denom_floor = 1e-4);

struct SuiteCase {
  std::string name;
  double max_rel_err = 0;
  int instances = 0;
  bool pass = false;
};

struct SuiteReport {
  std::vector<SuiteCase> cases;
  bool all_pass = false;
  double seconds = 0;

  std::string summary() const;
};

// Runs every registered case on `instances` random instances each.
SuiteReport run_gradient_suite(std::uint64_t seed, int instances = 20,
                               double tol = 1e-4);

}  // namespace tempose
