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

#include "snpl/config.h"

#include <fstream>
#include <set>

namespace snpl {
namespace {

using nlohmann::json;

void RejectUnknown(const json& doc, const std::set<std::string>& known,
                   const std::string& where) {
  if (!doc.is_object()) throw ValidationError(where + " must be an object");
  for (const auto& [key, value] : doc.items()) {
    if (!known.contains(key)) {
      throw ValidationError("unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
T Get(const json& doc, const std::string& key, T fallback) {
  if (!doc.contains(key) || doc.at(key).is_null()) return fallback;
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError("bad value for '" + key + "': " + e.what());
  }
}

SafetySpec ParseSpec(const json& doc) {
  RejectUnknown(doc, {"goal", "guardrails", "weights", "alpha", "senses"},
                "spec");
  SafetySpec spec = SyntheticSpec();
  spec.goal = Get(doc, "goal", spec.goal);
  spec.guardrails = Get(doc, "guardrails", spec.guardrails);
  spec.weights = Get(doc, "weights", spec.weights);
  spec.alpha = Get(doc, "alpha", spec.alpha);
  spec.senses.clear();
  for (const auto& s : Get(doc, "senses", std::vector<std::string>{})) {
    spec.senses.push_back(ParseSense(s));
  }
  if (spec.weights.size() != spec.guardrails.size()) {
    throw ValidationError("w has " + std::to_string(spec.weights.size()) +
                          " entries but |S| = " +
                          std::to_string(spec.guardrails.size()));
  }
  return spec;
}

Hyperparams ParseHyper(const json& doc) {
  RejectUnknown(doc,
                {"gamma", "eta", "B", "epsilon", "p", "n_sim", "n_sim_in_loop",
                 "folds", "seed"},
                "hyper");
  Hyperparams h;
  h.gamma = Get(doc, "gamma", h.gamma);
  if (doc.contains("eta") && !doc["eta"].is_null()) h.eta = Get(doc, "eta", 1);
  if (doc.contains("B") && !doc["B"].is_null()) h.B = Get(doc, "B", 0.0);
  if (doc.contains("epsilon") && !doc["epsilon"].is_null()) {
    h.epsilon = Get(doc, "epsilon", 0.0);
  }
  h.p = Get(doc, "p", h.p);
  h.n_sim = Get(doc, "n_sim", h.n_sim);
  h.n_sim_in_loop = Get(doc, "n_sim_in_loop", h.n_sim_in_loop);
  h.folds = Get(doc, "folds", h.folds);
  h.seed = Get<std::uint64_t>(doc, "seed", h.seed);
  h.Validate();
  return h;
}

ThresholdSpec ParseThreshold(const json& doc) {
  RejectUnknown(doc, {"feature", "cutoff"}, "threshold policy");
  return ThresholdSpec{ParseFeature(Get<std::string>(doc, "feature", "g1")),
                       Get(doc, "cutoff", 0.5)};
}

void CheckSchema(const json& doc) {
  const int version = Get(doc, "schema_version", kSchemaVersion);
  if (version != kSchemaVersion) {
    throw ValidationError("unsupported schema_version " +
                          std::to_string(version));
  }
}

json ThresholdJson(const ThresholdSpec& t) {
  return {{"feature", ToString(t.feature)}, {"cutoff", t.cutoff}};
}

}  // namespace

MethodTag MethodTag::Parse(const std::string& text) {
  if (text == "snpl" || text == "bonferroni") return MethodTag{text, 0.0};
  if (text.rfind("ds-", 0) == 0) {
    int pct = 0;
    try {
      std::size_t used = 0;
      pct = std::stoi(text.substr(3), &used);
      if (used != text.size() - 3) pct = 0;
    } catch (const std::exception&) {
      pct = 0;
    }
    if (pct > 0 && pct < 100) return MethodTag{text, pct / 100.0};
  }
  throw ValidationError("unknown method '" + text + "'");
}

std::vector<PolicyPtr> PolicyClassSpec::Build() const {
  std::vector<PolicyPtr> out;
  if (!policies.empty()) {
    for (const ThresholdSpec& t : policies) {
      out.push_back(std::make_shared<ThresholdPolicy>(t.feature, t.cutoff));
    }
    return out;
  }
  if (grid_size < 2) throw ValidationError("grid_size must be >= 2");
  const std::size_t nf = features.size();
  out.resize(nf * grid_size);
  for (std::size_t f = 0; f < nf; ++f) {
    for (int i = 0; i < grid_size; ++i) {
      const std::size_t slot = order == ClassOrder::kCutoffMajor
                                   ? i * nf + f
                                   : f * grid_size + i;
      out[slot] = std::make_shared<ThresholdPolicy>(
          features[f], static_cast<double>(i) / (grid_size - 1));
    }
  }
  return out;
}

void BenchmarkConfig::Validate() const {
  if (replications < 1) throw ValidationError("replications must be >= 1");
  if (methods.empty()) throw ValidationError("no methods configured");
  if (n < 2) throw ValidationError("n must be >= 2");
  spec.Validate(2);
  hyper.Validate();
}

RunConfig ParseRunConfig(const json& doc) {
  RejectUnknown(doc,
                {"schema_version", "method", "mode", "in_loop_bound",
                 "scan_order", "spec", "hyper", "num_actions", "propensity",
                 "positivity_floor", "policy_class", "baseline"},
                "config");
  CheckSchema(doc);
  RunConfig c;
  c.method = MethodTag::Parse(Get<std::string>(doc, "method", "snpl"));
  c.mode = ParseMode(Get<std::string>(doc, "mode", "asymptotic"));
  c.in_loop = ParseInLoopBound(
      Get<std::string>(doc, "in_loop_bound", "bonferroni-normal"));
  c.scan_order =
      ParseScanOrder(Get<std::string>(doc, "scan_order", "declared"));
  if (doc.contains("spec")) c.spec = ParseSpec(doc["spec"]);
  if (doc.contains("hyper")) c.hyper = ParseHyper(doc["hyper"]);
  c.num_actions = Get(doc, "num_actions", c.num_actions);
  if (doc.contains("propensity") && doc["propensity"].is_string()) {
    if (doc["propensity"].get<std::string>() != "columns") {
      throw ValidationError("propensity must be a list or \"columns\"");
    }
    c.propensity.clear();
  } else {
    c.propensity = Get(doc, "propensity",
                       std::vector<double>(c.num_actions, 1.0 / c.num_actions));
    if (static_cast<int>(c.propensity.size()) != c.num_actions) {
      throw ValidationError("propensity needs one entry per action");
    }
  }
  c.positivity_floor = Get(doc, "positivity_floor", 1.0 / c.num_actions);
  if (doc.contains("policy_class")) {
    const json& pc = doc["policy_class"];
    RejectUnknown(pc, {"features", "grid_size", "order", "policies"},
                  "policy_class");
    if (pc.contains("features")) {
      c.policy_class.features.clear();
      for (const auto& f : pc["features"]) {
        c.policy_class.features.push_back(ParseFeature(f.get<std::string>()));
      }
    }
    c.policy_class.grid_size = Get(pc, "grid_size", c.policy_class.grid_size);
    c.policy_class.order =
        ParseClassOrder(Get<std::string>(pc, "order", "cutoff-major"));
    if (pc.contains("policies")) {
      for (const auto& p : pc["policies"]) {
        c.policy_class.policies.push_back(ParseThreshold(p));
      }
    }
  }
  if (doc.contains("baseline")) c.baseline = ParseThreshold(doc["baseline"]);
  if (c.num_actions != 2) {
    throw ValidationError("threshold policies need num_actions = 2");
  }
  return c;
}

BenchmarkConfig ParseBenchmarkConfig(const json& doc) {
  RejectUnknown(doc,
                {"schema_version", "methods", "mode", "in_loop_bound",
                 "scan_order", "n", "replications", "grid_size", "class_order",
                 "spec", "hyper", "master_seed"},
                "benchmark config");
  CheckSchema(doc);
  BenchmarkConfig c;
  for (const auto& m : Get(doc, "methods",
                           std::vector<std::string>{"ds-25", "ds-50", "ds-75",
                                                    "bonferroni", "snpl"})) {
    c.methods.push_back(MethodTag::Parse(m));
  }
  c.mode = ParseMode(Get<std::string>(doc, "mode", "asymptotic"));
  c.in_loop = ParseInLoopBound(
      Get<std::string>(doc, "in_loop_bound", "bonferroni-normal"));
  c.scan_order =
      ParseScanOrder(Get<std::string>(doc, "scan_order", "declared"));
  c.n = Get<std::size_t>(doc, "n", c.n);
  c.replications = Get(doc, "replications", c.replications);
  c.grid_size = Get(doc, "grid_size", c.grid_size);
  c.class_order =
      ParseClassOrder(Get<std::string>(doc, "class_order", "cutoff-major"));
  if (doc.contains("spec")) c.spec = ParseSpec(doc["spec"]);
  if (doc.contains("hyper")) c.hyper = ParseHyper(doc["hyper"]);
  c.master_seed = Get<std::uint64_t>(doc, "master_seed", c.master_seed);
  c.Validate();
  return c;
}

json ToJson(const SafetySpec& spec) {
  json senses = json::array();
  for (std::size_t s = 0; s < spec.num_guardrails(); ++s) {
    senses.push_back(ToString(spec.sense(s)));
  }
  return {{"goal", spec.goal},
          {"guardrails", spec.guardrails},
          {"weights", spec.weights},
          {"alpha", spec.alpha},
          {"senses", senses}};
}

json ToJson(const Hyperparams& h) {
  json doc = {{"gamma", h.gamma},
              {"p", h.p},
              {"n_sim", h.n_sim},
              {"n_sim_in_loop", h.n_sim_in_loop},
              {"folds", h.folds},
              {"seed", h.seed}};
  doc["eta"] = h.eta ? json(*h.eta) : json(nullptr);
  doc["B"] = h.B ? json(*h.B) : json(nullptr);
  doc["epsilon"] = h.epsilon ? json(*h.epsilon) : json(nullptr);
  return doc;
}

json ToJson(const RunConfig& c) {
  json policies = json::array();
  for (const ThresholdSpec& t : c.policy_class.policies) {
    policies.push_back(ThresholdJson(t));
  }
  json features = json::array();
  for (Feature f : c.policy_class.features) features.push_back(ToString(f));
  json doc = {{"schema_version", kSchemaVersion},
              {"method", c.method.name},
              {"mode", ToString(c.mode)},
              {"in_loop_bound", ToString(c.in_loop)},
              {"scan_order", ToString(c.scan_order)},
              {"spec", ToJson(c.spec)},
              {"hyper", ToJson(c.hyper)},
              {"num_actions", c.num_actions},
              {"positivity_floor", c.positivity_floor},
              {"policy_class",
               {{"features", features},
                {"grid_size", c.policy_class.grid_size},
                {"order", ToString(c.policy_class.order)},
                {"policies", policies}}},
              {"baseline", ThresholdJson(c.baseline)}};
  doc["propensity"] = c.propensity.empty() ? json("columns") : json(c.propensity);
  return doc;
}

json ToJson(const BenchmarkConfig& c) {
  json methods = json::array();
  for (const MethodTag& m : c.methods) methods.push_back(m.name);
  return {{"schema_version", kSchemaVersion},
          {"methods", methods},
          {"mode", ToString(c.mode)},
          {"in_loop_bound", ToString(c.in_loop)},
          {"scan_order", ToString(c.scan_order)},
          {"n", c.n},
          {"replications", c.replications},
          {"grid_size", c.grid_size},
          {"class_order", ToString(c.class_order)},
          {"spec", ToJson(c.spec)},
          {"hyper", ToJson(c.hyper)},
          {"master_seed", c.master_seed}};
}

json ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError("invalid JSON in " + path + ": " + e.what());
  }
}

}  // namespace snpl
