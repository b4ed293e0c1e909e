//
// Copyright 2026 The SNPL Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// Comparison methods: data-splitting high-confidence policy improvement and a
// Bonferroni correction over the whole policy class.

#ifndef SNPL_BASELINES_H_
#define SNPL_BASELINES_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "snpl/bounds.h"
#include "snpl/core.h"
#include "snpl/snpl.h"

namespace snpl {

struct SplitPlan {
  double rho = 0.5;
  std::vector<std::size_t> learning;  // floor(rho n) rows
  std::vector<std::size_t> testing;
  std::uint64_t seed = 0;

  // Random permutation; the first floor(rho n) rows learn, the rest test.
  static SplitPlan Make(std::size_t n, double rho, std::uint64_t seed);
};

struct PolicyScore {
  std::size_t class_index = 0;
  std::string policy_id;
  double min_margin = 0.0;
  double goal_estimate = 0.0;
  double score = 0.0;  // selection objective (data splitting only)
  bool certified = false;
  std::vector<double> estimates;  // D_j per guardrail
  std::vector<double> bounds;     // per guardrail
};

struct HcpiTrace {
  std::string method;  // "ds-25", "ds-50", ...
  Mode mode = Mode::kAsymptotic;
  SplitPlan plan;
  std::vector<PolicyScore> learning_scores;
  std::vector<double> baseline_values;  // V_j(pi0) on the learning split
  std::optional<std::size_t> candidate;  // index into learning_scores
  LowerBoundTable test_bounds;
  std::vector<double> test_baseline_values;  // V_j(pi0) on the test split
  double test_margin = 0.0;
  Decision decision;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;
};

struct BonferroniTrace {
  Mode mode = Mode::kAsymptotic;
  double per_test_level = 0.0;
  double critical_value = 0.0;
  std::vector<PolicyScore> scores;
  std::vector<double> baseline_values;  // V_j(pi0), one per guardrail
  Decision decision;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;
};

// Learning split: per-policy bounds at level alpha (finite: union over the
// full class; asymptotic: normal quantile over S only) and the objective
//   f = 1[M' >= 0] V_g + 1[M' < 0] M'.
// Test split: joint bounds over S for the chosen policy at level alpha
// (finite: empirical Bernstein; asymptotic: sup-t). Returns the baseline
// unless the test margin is strictly positive.
HcpiTrace RunHcpi(const Dataset& dataset, std::span<const PolicyPtr> policies,
                  const PolicyPtr& baseline, const SafetySpec& spec,
                  double rho, Mode mode, const Hyperparams& hyper);

// Every (policy, guardrail) bound at per-test level alpha / (|Pi| |S|); the
// certified policy with the largest goal estimate wins.
BonferroniTrace RunBonferroni(const Dataset& dataset,
                              std::span<const PolicyPtr> policies,
                              const PolicyPtr& baseline,
                              const SafetySpec& spec, Mode mode,
                              const Hyperparams& hyper);

}  // namespace snpl

#endif  // SNPL_BASELINES_H_
