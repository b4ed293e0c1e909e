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

#include "snpl/trace.h"

#include "snpl/config.h"

namespace snpl {

using nlohmann::json;

namespace {

json PolicyScores(const std::vector<PolicyScore>& scores) {
  json out = json::array();
  for (const PolicyScore& s : scores) {
    out.push_back({{"class_index", s.class_index},
                   {"policy_id", s.policy_id},
                   {"min_margin", s.min_margin},
                   {"goal_estimate", s.goal_estimate},
                   {"score", s.score},
                   {"certified", s.certified},
                   {"estimates", s.estimates},
                   {"bounds", s.bounds}});
  }
  return out;
}

}  // namespace

json ToJson(const Decision& d) {
  json doc = {{"policy_id", d.policy_id},
              {"is_baseline", d.is_baseline},
              {"goal_estimate", d.goal_estimate},
              {"baseline_goal_estimate", d.baseline_goal_estimate}};
  doc["class_index"] = d.class_index ? json(*d.class_index) : json(nullptr);
  return doc;
}

json ToJson(const LowerBoundTable& t) {
  json entries = json::array();
  for (const BoundEntry& e : t.entries) {
    entries.push_back({{"policy_id", e.policy_id},
                       {"guardrail", e.guardrail},
                       {"sense", ToString(e.sense)},
                       {"estimate", e.estimate},
                       {"width", e.width},
                       {"bound", e.bound},
                       {"margin", e.margin()}});
  }
  return {{"method", ToString(t.method)},
          {"level", t.level},
          {"num_policies", t.num_policies},
          {"num_guardrails", t.num_guardrails},
          {"correction_size", t.correction_size},
          {"critical_value", t.critical_value},
          {"entries", entries}};
}

json ToJson(const SnplTrace& t) {
  json scans = json::array();
  for (const ScanRecord& r : t.scans) {
    scans.push_back({{"class_index", r.class_index},
                     {"policy_id", r.policy_id},
                     {"estimates", r.estimates},
                     {"in_loop_bounds", r.in_loop_bounds},
                     {"m_prime", r.m_prime},
                     {"noise", r.noise},
                     {"admitted", r.admitted}});
  }
  return {{"schema_version", kSchemaVersion},
          {"method", "snpl"},
          {"mode", ToString(t.mode)},
          {"in_loop_bound", ToString(t.in_loop)},
          {"scan_order", ToString(t.scan_order)},
          {"n", t.n},
          {"class_size", t.class_size},
          {"eta", t.eta},
          {"budget",
           {{"epsilon", t.budget.epsilon},
            {"gamma", t.budget.gamma},
            {"delta_star", t.budget.delta_star},
            {"alpha_prime", t.budget.alpha_prime}}},
          {"sensitivity",
           {{"xi", t.sensitivity.xi},
            {"t", t.sensitivity.t_value},
            {"floor", t.sensitivity.floor},
            {"B", t.sensitivity.B}}},
          {"threshold_scale", t.threshold_scale},
          {"query_scale", t.query_scale},
          {"threshold", t.threshold},
          {"scans", scans},
          {"pruned", t.pruned},
          {"baseline_values", t.baseline_values},
          {"final_bounds", ToJson(t.final_bounds)},
          {"final_margins", t.final_margins},
          {"goal_estimates", t.goal_estimates},
          {"decision", ToJson(t.decision)},
          {"seeds",
           {{"master", t.seeds.master},
            {"nuisance", t.seeds.nuisance},
            {"noise", t.seeds.noise},
            {"final_supt", t.seeds.final_supt},
            {"scan_order", t.seeds.scan_order}}},
          {"warnings", t.warnings}};
}

json ToJson(const HcpiTrace& t) {
  json doc = {{"schema_version", kSchemaVersion},
              {"method", t.method},
              {"mode", ToString(t.mode)},
              {"rho", t.plan.rho},
              {"learning_size", t.plan.learning.size()},
              {"testing_size", t.plan.testing.size()},
              {"split_seed", t.plan.seed},
              {"baseline_values", t.baseline_values},
              {"learning_scores", PolicyScores(t.learning_scores)},
              {"test_margin", t.test_margin},
              {"decision", ToJson(t.decision)},
              {"seed", t.seed},
              {"warnings", t.warnings}};
  doc["candidate"] = t.candidate ? json(*t.candidate) : json(nullptr);
  doc["test_baseline_values"] = t.test_baseline_values;
  doc["test_bounds"] =
      t.candidate ? ToJson(t.test_bounds) : json(nullptr);
  return doc;
}

json ToJson(const BonferroniTrace& t) {
  return {{"schema_version", kSchemaVersion},
          {"method", "bonferroni"},
          {"mode", ToString(t.mode)},
          {"per_test_level", t.per_test_level},
          {"critical_value", t.critical_value},
          {"baseline_values", t.baseline_values},
          {"scores", PolicyScores(t.scores)},
          {"decision", ToJson(t.decision)},
          {"seed", t.seed},
          {"warnings", t.warnings}};
}

}  // namespace snpl
