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

#include "snpl/snpl.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include "snpl/rng.h"

namespace snpl {
namespace {

InfluenceTable SingleBlockTable(const Eigen::MatrixXd& block,
                                std::size_t s_count) {
  InfluenceTable t;
  t.values = block;
  t.estimates = block.colwise().mean().transpose();
  t.policy_ids = {"candidate"};
  t.num_guardrails = s_count;
  return t;
}

}  // namespace

std::string ToString(InLoopBound bound) {
  return bound == InLoopBound::kSupT ? "supt" : "bonferroni-normal";
}

InLoopBound ParseInLoopBound(const std::string& text) {
  if (text == "supt") return InLoopBound::kSupT;
  if (text == "bonferroni-normal") return InLoopBound::kBonferroniNormal;
  throw ValidationError("unknown in-loop bound '" + text + "'");
}

std::string ToString(ScanOrder order) {
  return order == ScanOrder::kDeclared ? "declared" : "shuffled";
}

ScanOrder ParseScanOrder(const std::string& text) {
  if (text == "declared") return ScanOrder::kDeclared;
  if (text == "shuffled") return ScanOrder::kShuffled;
  throw ValidationError("unknown scan order '" + text + "'");
}

SnplSeeds DeriveSnplSeeds(std::uint64_t master) {
  return SnplSeeds{master, DeriveSeed(master, "nuisance"),
                   DeriveSeed(master, "noise"),
                   DeriveSeed(master, "final-supt"),
                   DeriveSeed(master, "scan-order")};
}

std::vector<double> InLoopBounds(const Eigen::MatrixXd& candidate,
                                 std::span<const Eigen::MatrixXd> pruned,
                                 const SnplConfig& config, double alpha_prime,
                                 int eta, double positivity_floor,
                                 std::uint64_t supt_seed) {
  const SafetySpec& spec = config.spec;
  const std::size_t s_count = spec.num_guardrails();
  LowerBoundTable bounds;
  std::size_t row = 0;
  if (config.mode == Mode::kFinite) {
    // The union is taken over eta policies no matter how many were admitted.
    bounds = FiniteBounds(SingleBlockTable(candidate, s_count), spec,
                          alpha_prime, static_cast<std::size_t>(eta),
                          positivity_floor);
  } else if (config.in_loop == InLoopBound::kBonferroniNormal) {
    bounds = NormalQuantileBounds(SingleBlockTable(candidate, s_count), spec,
                                  alpha_prime / (eta * static_cast<double>(s_count)),
                                  static_cast<std::size_t>(eta) * s_count);
  } else {
    InfluenceTable t;
    t.num_guardrails = s_count;
    t.values.resize(candidate.rows(),
                    static_cast<Eigen::Index>((pruned.size() + 1) * s_count));
    for (std::size_t p = 0; p < pruned.size(); ++p) {
      t.values.middleCols(static_cast<Eigen::Index>(p * s_count),
                          static_cast<Eigen::Index>(s_count)) = pruned[p];
      t.policy_ids.push_back("pruned-" + std::to_string(p));
    }
    t.values.rightCols(static_cast<Eigen::Index>(s_count)) = candidate;
    t.policy_ids.push_back("candidate");
    t.estimates = t.values.colwise().mean().transpose();
    bounds = AsymptoticBounds(t, spec, alpha_prime, config.hyper.n_sim_in_loop,
                              supt_seed);
    row = pruned.size();
  }
  std::vector<double> out(s_count);
  for (std::size_t s = 0; s < s_count; ++s) out[s] = bounds.at(row, s).bound;
  return out;
}

std::optional<std::size_t> SelectCertified(std::span<const double> margins,
                                           std::span<const double> goals) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < margins.size(); ++i) {
    if (!(margins[i] > 0.0)) continue;
    if (!best || goals[i] > goals[*best]) best = i;
  }
  return best;
}

Certification FinalCertify(const PolicyEvaluator& evaluator,
                           std::span<const PolicyPtr> pruned_policies,
                           std::span<const Eigen::MatrixXd> pruned_blocks,
                           Mode mode, double level, int n_sim,
                           std::uint64_t supt_seed) {
  Certification out;
  if (pruned_policies.empty()) return out;
  std::vector<std::string> ids;
  for (const PolicyPtr& p : pruned_policies) ids.push_back(p->id());
  const InfluenceTable table =
      evaluator.TableFromBlocks(pruned_blocks, std::move(ids));
  out.bounds = mode == Mode::kFinite
                   ? FiniteBounds(table, evaluator.spec(), level,
                                  pruned_policies.size(),
                                  evaluator.dataset().positivity_floor())
                   : AsymptoticBounds(table, evaluator.spec(), level, n_sim,
                                      supt_seed);
  for (std::size_t p = 0; p < pruned_policies.size(); ++p) {
    out.margins.push_back(out.bounds.MinMargin(p));
    out.goal_estimates.push_back(evaluator.GoalValue(*pruned_policies[p]));
  }
  out.winner = SelectCertified(out.margins, out.goal_estimates);
  return out;
}

SnplTrace RunSnpl(const Dataset& dataset,
                  std::span<const PolicyPtr> policy_class,
                  const SnplConfig& config) {
  ValidateDataset(dataset);
  config.spec.Validate(dataset.outcome_dim());
  config.hyper.Validate();
  if (policy_class.empty()) throw ValidationError("policy class is empty");
  if (!config.baseline) throw ValidationError("baseline policy missing");

  SnplTrace trace;
  trace.mode = config.mode;
  trace.in_loop = config.in_loop;
  trace.scan_order = config.scan_order;
  trace.n = dataset.size();
  trace.class_size = policy_class.size();
  trace.seeds = DeriveSnplSeeds(config.hyper.seed);

  const SafetySpec& spec = config.spec;
  const double c = dataset.positivity_floor();
  trace.budget = StabilityBudget::Make(spec.alpha, dataset.size(),
                                       config.hyper.gamma,
                                       config.hyper.epsilon);
  const double alpha_prime = trace.budget.alpha_prime;
  trace.eta = config.hyper.eta
                  ? *config.hyper.eta
                  : EtaHeuristic(spec.alpha, alpha_prime, policy_class.size(),
                                 spec.num_guardrails(), config.hyper.p);
  trace.sensitivity = SensitivityConstants::Make(
      config.mode, dataset.size(), spec, c, alpha_prime, trace.eta,
      config.hyper.B);
  const double scale_base =
      trace.sensitivity.B * trace.eta / trace.budget.epsilon;
  trace.threshold_scale = 2.0 * scale_base;
  trace.query_scale = 4.0 * scale_base;

  PseudoOutcomes pseudo = PseudoOutcomes::Ipw(dataset);
  if (config.mode == Mode::kAsymptotic) {
    Rng nuisance_rng(trace.seeds.nuisance);
    const NuisanceModel mu =
        NuisanceModel::Fit(dataset, config.hyper.folds, nuisance_rng);
    trace.warnings = mu.warnings();
    pseudo = PseudoOutcomes::Dr(dataset, mu);
  }
  const PolicyEvaluator evaluator(dataset, std::move(pseudo), *config.baseline,
                                  spec);
  const std::string baseline_id = config.baseline->id();
  for (int j : spec.guardrails) {
    trace.baseline_values.push_back(evaluator.BaselineValue(j));
  }

  Rng noise_rng(trace.seeds.noise);
  trace.threshold = SampleLaplace(trace.threshold_scale, noise_rng);

  std::vector<PolicyPtr> pruned_policies;
  std::vector<Eigen::MatrixXd> pruned_blocks;
  std::vector<std::size_t> order(policy_class.size());
  std::iota(order.begin(), order.end(), 0);
  if (config.scan_order == ScanOrder::kShuffled) {
    Rng order_rng(trace.seeds.scan_order);
    std::shuffle(order.begin(), order.end(), order_rng);
  }
  for (std::size_t idx : order) {
    const PolicyPtr& policy = policy_class[idx];
    if (policy->id() == baseline_id) continue;
    Eigen::MatrixXd block = evaluator.InfluenceColumns(*policy);
    ScanRecord rec;
    rec.class_index = idx;
    rec.policy_id = policy->id();
    for (Eigen::Index s = 0; s < block.cols(); ++s) {
      rec.estimates.push_back(block.col(s).mean());
    }
    rec.in_loop_bounds =
        InLoopBounds(block, pruned_blocks, config, alpha_prime, trace.eta, c,
                     DeriveSeed(trace.seeds.master, 1000003ULL + idx));
    rec.m_prime = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < spec.num_guardrails(); ++s) {
      const double b = rec.in_loop_bounds[s];
      rec.m_prime = std::min(
          rec.m_prime, spec.sense(s) == BoundSense::kLower ? b : -b);
    }
    rec.noise = SampleLaplace(trace.query_scale, noise_rng);
    rec.admitted = rec.m_prime + rec.noise > trace.threshold;
    trace.scans.push_back(rec);
    if (rec.admitted) {
      trace.pruned.push_back(idx);
      pruned_policies.push_back(policy);
      pruned_blocks.push_back(std::move(block));
      if (static_cast<int>(trace.pruned.size()) == trace.eta) break;
    }
  }

  Certification cert = FinalCertify(evaluator, pruned_policies, pruned_blocks,
                                    config.mode, alpha_prime,
                                    config.hyper.n_sim,
                                    trace.seeds.final_supt);
  trace.final_bounds = std::move(cert.bounds);
  trace.final_margins = std::move(cert.margins);
  trace.goal_estimates = std::move(cert.goal_estimates);

  trace.decision.baseline_goal_estimate = evaluator.BaselineGoalValue();
  if (cert.winner) {
    const std::size_t w = *cert.winner;
    trace.decision.is_baseline = false;
    trace.decision.class_index = trace.pruned[w];
    trace.decision.policy_id = pruned_policies[w]->id();
    trace.decision.goal_estimate = trace.goal_estimates[w];
  } else {
    trace.decision.policy_id = baseline_id;
    trace.decision.goal_estimate = evaluator.BaselineGoalValue();
  }
  return trace;
}

}  // namespace snpl
