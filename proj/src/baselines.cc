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

#include "snpl/baselines.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "snpl/estimators.h"
#include "snpl/rng.h"

namespace snpl {
namespace {

InfluenceTable OneBlock(const Eigen::MatrixXd& block, std::string id,
                        std::size_t s_count) {
  InfluenceTable t;
  t.values = block;
  t.estimates = block.colwise().mean().transpose();
  t.policy_ids = {std::move(id)};
  t.num_guardrails = s_count;
  return t;
}

PseudoOutcomes MakePseudo(const Dataset& data, Mode mode, int folds,
                          std::uint64_t seed,
                          std::vector<std::string>& warnings) {
  if (mode == Mode::kFinite) return PseudoOutcomes::Ipw(data);
  Rng rng(seed);
  const NuisanceModel mu = NuisanceModel::Fit(data, folds, rng);
  warnings.insert(warnings.end(), mu.warnings().begin(), mu.warnings().end());
  return PseudoOutcomes::Dr(data, mu);
}

std::size_t CountCandidates(std::span<const PolicyPtr> policies,
                            const std::string& baseline_id) {
  return static_cast<std::size_t>(std::count_if(
      policies.begin(), policies.end(),
      [&](const PolicyPtr& p) { return p->id() != baseline_id; }));
}

void FillGuardrails(const LowerBoundTable& b, PolicyScore& score) {
  for (std::size_t s = 0; s < b.num_guardrails; ++s) {
    score.estimates.push_back(b.at(0, s).estimate);
    score.bounds.push_back(b.at(0, s).bound);
  }
}

std::vector<double> BaselineValues(const PolicyEvaluator& eval) {
  std::vector<double> out;
  for (int j : eval.spec().guardrails) out.push_back(eval.BaselineValue(j));
  return out;
}

}  // namespace

SplitPlan SplitPlan::Make(std::size_t n, double rho, std::uint64_t seed) {
  if (!(rho > 0.0 && rho < 1.0)) throw ValidationError("rho must be in (0, 1)");
  SplitPlan plan;
  plan.rho = rho;
  plan.seed = seed;
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  const auto cut = static_cast<std::size_t>(std::floor(rho * n));
  plan.learning.assign(perm.begin(), perm.begin() + cut);
  plan.testing.assign(perm.begin() + cut, perm.end());
  return plan;
}

HcpiTrace RunHcpi(const Dataset& dataset, std::span<const PolicyPtr> policies,
                  const PolicyPtr& baseline, const SafetySpec& spec,
                  double rho, Mode mode, const Hyperparams& hyper) {
  ValidateDataset(dataset);
  spec.Validate(dataset.outcome_dim());
  hyper.Validate();
  if (!baseline) throw ValidationError("baseline policy missing");

  HcpiTrace trace;
  trace.method = "ds-" + std::to_string(static_cast<int>(std::lround(rho * 100)));
  trace.mode = mode;
  trace.seed = hyper.seed;
  trace.plan = SplitPlan::Make(dataset.size(), rho,
                               DeriveSeed(hyper.seed, "split"));
  const std::size_t min_rows =
      mode == Mode::kAsymptotic ? static_cast<std::size_t>(hyper.folds) : 2;
  if (trace.plan.learning.size() < min_rows ||
      trace.plan.testing.size() < min_rows) {
    throw ValidationError("split too small: learning " +
                          std::to_string(trace.plan.learning.size()) +
                          ", testing " +
                          std::to_string(trace.plan.testing.size()) +
                          " rows for " + std::to_string(min_rows) +
                          " cross-fitting folds");
  }

  const std::string baseline_id = baseline->id();
  const std::size_t s_count = spec.num_guardrails();
  const double c = dataset.positivity_floor();
  const std::size_t class_size = CountCandidates(policies, baseline_id);

  // Learning split: score every candidate.
  const Dataset learn = dataset.Subset(trace.plan.learning);
  const PolicyEvaluator learn_eval(
      learn,
      MakePseudo(learn, mode, hyper.folds, DeriveSeed(hyper.seed, "learn-nuisance"),
                 trace.warnings),
      *baseline, spec);
  for (std::size_t idx = 0; idx < policies.size(); ++idx) {
    const PolicyPtr& policy = policies[idx];
    if (policy->id() == baseline_id) continue;
    const auto cols = learn_eval.Evaluate(*policy);
    const InfluenceTable t = OneBlock(cols.influence, policy->id(), s_count);
    const LowerBoundTable b =
        mode == Mode::kFinite
            ? FiniteBounds(t, spec, spec.alpha, class_size, c)
            : NormalQuantileBounds(t, spec, spec.alpha / s_count, s_count);
    PolicyScore score;
    score.class_index = idx;
    score.policy_id = policy->id();
    score.min_margin = b.MinMargin(0);
    score.goal_estimate = cols.goal;
    score.certified = score.min_margin >= 0.0;
    FillGuardrails(b, score);
    score.score = score.certified ? cols.goal : score.min_margin;
    if (!trace.candidate ||
        score.score > trace.learning_scores[*trace.candidate].score) {
      trace.candidate = trace.learning_scores.size();
    }
    trace.learning_scores.push_back(std::move(score));
  }

  trace.decision.policy_id = baseline_id;
  trace.baseline_values = BaselineValues(learn_eval);
  trace.decision.baseline_goal_estimate = learn_eval.BaselineGoalValue();
  trace.decision.goal_estimate = learn_eval.BaselineGoalValue();
  if (!trace.candidate) return trace;

  // Testing split: certify the single candidate.
  const PolicyScore& chosen = trace.learning_scores[*trace.candidate];
  const Dataset test = dataset.Subset(trace.plan.testing);
  const PolicyEvaluator test_eval(
      test,
      MakePseudo(test, mode, hyper.folds, DeriveSeed(hyper.seed, "test-nuisance"),
                 trace.warnings),
      *baseline, spec);
  const InfluenceTable t = OneBlock(
      test_eval.InfluenceColumns(*policies[chosen.class_index]),
      chosen.policy_id, s_count);
  trace.test_bounds =
      mode == Mode::kFinite
          ? FiniteBounds(t, spec, spec.alpha, 1, c)
          : AsymptoticBounds(t, spec, spec.alpha, hyper.n_sim,
                             DeriveSeed(hyper.seed, "test-supt"));
  trace.test_baseline_values = BaselineValues(test_eval);
  trace.test_margin = trace.test_bounds.MinMargin(0);
  if (trace.test_margin > 0.0) {
    trace.decision.is_baseline = false;
    trace.decision.policy_id = chosen.policy_id;
    trace.decision.class_index = chosen.class_index;
    trace.decision.goal_estimate = chosen.goal_estimate;
  }
  return trace;
}

BonferroniTrace RunBonferroni(const Dataset& dataset,
                              std::span<const PolicyPtr> policies,
                              const PolicyPtr& baseline,
                              const SafetySpec& spec, Mode mode,
                              const Hyperparams& hyper) {
  ValidateDataset(dataset);
  spec.Validate(dataset.outcome_dim());
  hyper.Validate();
  if (!baseline) throw ValidationError("baseline policy missing");

  BonferroniTrace trace;
  trace.mode = mode;
  trace.seed = hyper.seed;
  const std::string baseline_id = baseline->id();
  const std::size_t s_count = spec.num_guardrails();
  const std::size_t class_size =
      std::max<std::size_t>(CountCandidates(policies, baseline_id), 1);
  trace.per_test_level = spec.alpha / (class_size * static_cast<double>(s_count));

  const PolicyEvaluator eval(
      dataset,
      MakePseudo(dataset, mode, hyper.folds, DeriveSeed(hyper.seed, "nuisance"),
                 trace.warnings),
      *baseline, spec);
  std::vector<double> margins;
  std::vector<double> goals;
  for (std::size_t idx = 0; idx < policies.size(); ++idx) {
    const PolicyPtr& policy = policies[idx];
    if (policy->id() == baseline_id) continue;
    const auto cols = eval.Evaluate(*policy);
    const InfluenceTable t = OneBlock(cols.influence, policy->id(), s_count);
    const LowerBoundTable b =
        mode == Mode::kFinite
            ? FiniteBounds(t, spec, spec.alpha, class_size,
                           dataset.positivity_floor())
            : NormalQuantileBounds(t, spec, trace.per_test_level,
                                   class_size * s_count);
    trace.critical_value = b.critical_value;
    PolicyScore score;
    score.class_index = idx;
    score.policy_id = policy->id();
    score.min_margin = b.MinMargin(0);
    score.goal_estimate = cols.goal;
    score.certified = score.min_margin > 0.0;
    FillGuardrails(b, score);
    score.score = score.goal_estimate;
    margins.push_back(score.min_margin);
    goals.push_back(score.goal_estimate);
    trace.scores.push_back(std::move(score));
  }

  trace.decision.policy_id = baseline_id;
  trace.baseline_values = BaselineValues(eval);
  trace.decision.baseline_goal_estimate = eval.BaselineGoalValue();
  trace.decision.goal_estimate = eval.BaselineGoalValue();
  if (const auto w = SelectCertified(margins, goals)) {
    const PolicyScore& s = trace.scores[*w];
    trace.decision.is_baseline = false;
    trace.decision.policy_id = s.policy_id;
    trace.decision.class_index = s.class_index;
    trace.decision.goal_estimate = s.goal_estimate;
  }
  return trace;
}

}  // namespace snpl
