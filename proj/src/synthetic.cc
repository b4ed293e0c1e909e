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

#include "snpl/synthetic.h"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace snpl {
namespace {

// E[1[g(X) < c] X2] and E[1[g(X) < c] X1 X3] for X ~ Unif(0,1)^3.
struct Moments {
  double x2 = 0.0;
  double x1x3 = 0.0;
};

double XLogX(double c) { return c > 0.0 ? c * std::log(c) : 0.0; }

// Sublevel moments of the nonnegative features, c clamped to [0, 1].
Moments SublevelMoments(Feature feature, double cutoff) {
  const double c = std::clamp(cutoff, 0.0, 1.0);
  switch (feature) {
    case Feature::kG1:
      return {0.5 * c, 0.25 * c * c};
    case Feature::kG2:
      return {0.5 * c * c, 0.25 * c};
    case Feature::kX3:
      return {0.5 * c, 0.25 * c * c};
    case Feature::kG3: {
      // E[1[UV < c] U] = c - c^2/2.
      const double m = c - 0.5 * c * c;
      return {m, 0.5 * m};
    }
    case Feature::kG4:
      // E[1[P < c] X2] = c^2/2 - c log c,
      // E[1[P < c] X1 X3] = c - 3c^2/4 + (c^2/2) log c.
      return {0.5 * c * c - XLogX(c),
              c - 0.75 * c * c + 0.5 * c * XLogX(c)};
    case Feature::kG5:
      break;
  }
  return {};
}

Moments TreatedMoments(Feature feature, double cutoff) {
  if (feature != Feature::kG5) return SublevelMoments(feature, cutoff);
  // -P < c  <=>  P > -c; P >= 0 so every c >= 0 treats almost surely.
  const Moments all{0.5, 0.25};
  if (cutoff >= 0.0) return all;
  const Moments below = SublevelMoments(Feature::kG4, -cutoff);
  // P(P = -c) = 0, so 1[P > -c] = 1 - 1[P < -c] a.s.
  return {all.x2 - below.x2, all.x1x3 - below.x1x3};
}

std::string Fixed6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

std::string ToString(Feature feature) {
  switch (feature) {
    case Feature::kG1:
      return "g1";
    case Feature::kG2:
      return "g2";
    case Feature::kG3:
      return "g3";
    case Feature::kG4:
      return "g4";
    case Feature::kG5:
      return "g5";
    case Feature::kX3:
      return "x3";
  }
  return "?";
}

Feature ParseFeature(const std::string& text) {
  if (text == "g1" || text == "x1") return Feature::kG1;
  if (text == "g2" || text == "x2") return Feature::kG2;
  if (text == "g3") return Feature::kG3;
  if (text == "g4") return Feature::kG4;
  if (text == "g5") return Feature::kG5;
  if (text == "x3") return Feature::kX3;
  throw ValidationError("unknown feature '" + text + "'");
}

ThresholdPolicy::ThresholdPolicy(Feature feature, double cutoff)
    : feature_(feature), cutoff_(cutoff) {
  if (!std::isfinite(cutoff)) throw ValidationError("cutoff must be finite");
}

std::string ThresholdPolicy::id() const {
  return ToString(feature_) + "<" + Fixed6(cutoff_);
}

int ThresholdPolicy::required_dim() const {
  switch (feature_) {
    case Feature::kG1:
      return 1;
    case Feature::kG2:
    case Feature::kG3:
      return 2;
    default:
      return 3;
  }
}

double ThresholdPolicy::FeatureValue(std::span<const double> x) const {
  switch (feature_) {
    case Feature::kG1:
      return x[0];
    case Feature::kG2:
      return x[1];
    case Feature::kG3:
      return x[0] * x[1];
    case Feature::kG4:
      return x[0] * x[1] * x[2];
    case Feature::kG5:
      return -(x[0] * x[1] * x[2]);
    case Feature::kX3:
      return x[2];
  }
  return 0.0;
}

void ThresholdPolicy::Evaluate(std::span<const double> x,
                               std::span<double> out) const {
  const bool treat = Treats(x);
  out[0] = treat ? 1.0 : 0.0;
  out[1] = treat ? 0.0 : 1.0;
}

std::shared_ptr<const ThresholdPolicy> SyntheticBaseline() {
  return std::make_shared<ThresholdPolicy>(Feature::kG1, 0.5);
}

SafetySpec SyntheticSpec() {
  SafetySpec spec;
  spec.goal = 1;
  spec.guardrails = {1, 2};
  spec.weights = {0.0, -0.1};
  spec.alpha = 0.1;
  return spec;
}

Dataset GenerateSynthetic(std::size_t n, Rng& rng) {
  std::vector<Observation> rows(n);
  for (Observation& o : rows) {
    o.covariates = {UniformOpen(rng), UniformOpen(rng), UniformOpen(rng)};
    const bool treated = UniformOpen(rng) < 0.5;
    o.action = treated ? 1 : 2;
    const double x1 = o.covariates[0];
    const double x2 = o.covariates[1];
    const double x3 = o.covariates[2];
    const double f1 = 0.5 * (1.0 - (treated ? x2 : 0.0));
    const double f2 = 0.5 * (1.0 + (treated ? x1 * x3 : 0.0));
    o.outcomes = {UniformOpen(rng) < f1 ? 1.0 : 0.0,
                  UniformOpen(rng) < f2 ? 1.0 : 0.0};
  }
  return Dataset(rows, PropensityModel::Constant({0.5, 0.5}, 0.5));
}

std::string ToString(ClassOrder order) {
  return order == ClassOrder::kCutoffMajor ? "cutoff-major" : "feature-major";
}

ClassOrder ParseClassOrder(const std::string& text) {
  if (text == "cutoff-major") return ClassOrder::kCutoffMajor;
  if (text == "feature-major") return ClassOrder::kFeatureMajor;
  throw ValidationError("unknown class order '" + text + "'");
}

std::vector<PolicyPtr> BuildThresholdClass(int grid_size, ClassOrder order) {
  if (grid_size < 2) throw ValidationError("grid size must be >= 2");
  const Feature features[] = {Feature::kG1, Feature::kG2, Feature::kG3,
                              Feature::kG4, Feature::kG5};
  std::vector<PolicyPtr> out(5 * grid_size);
  for (int f = 0; f < 5; ++f) {
    for (int i = 0; i < grid_size; ++i) {
      const double cutoff = static_cast<double>(i) / (grid_size - 1);
      const int slot = order == ClassOrder::kCutoffMajor ? i * 5 + f
                                                         : f * grid_size + i;
      out[slot] = std::make_shared<ThresholdPolicy>(features[f], cutoff);
    }
  }
  return out;
}

TrueValue TrueValues(const ThresholdPolicy& policy) {
  const Moments m = TreatedMoments(policy.feature(), policy.cutoff());
  return {0.5 - 0.5 * m.x2, 0.5 + 0.5 * m.x1x3};
}

bool OracleSafe(const TrueValue& policy, const TrueValue& baseline,
                const SafetySpec& spec) {
  for (std::size_t s = 0; s < spec.num_guardrails(); ++s) {
    const int j = spec.guardrails[s];
    const double diff = policy[j] - (1.0 + spec.weights[s]) * baseline[j];
    if (spec.sense(s) == BoundSense::kLower ? diff < 0.0 : diff > 0.0) {
      return false;
    }
  }
  return true;
}

std::vector<TruthRow> BuildTruthTable(std::span<const PolicyPtr> policies,
                                      const ThresholdPolicy& baseline,
                                      const SafetySpec& spec) {
  const TrueValue base = TrueValues(baseline);
  std::vector<TruthRow> rows;
  rows.reserve(policies.size());
  for (const PolicyPtr& p : policies) {
    const auto* tp = dynamic_cast<const ThresholdPolicy*>(p.get());
    if (tp == nullptr) {
      throw ValidationError("truth table needs threshold policies, got " +
                            p->id());
    }
    const TrueValue v = TrueValues(*tp);
    rows.push_back({p->id(), v, OracleSafe(v, base, spec)});
  }
  return rows;
}

std::string DatasetCsv(const Dataset& dataset) {
  std::string out;
  for (int c = 1; c <= dataset.covariate_dim(); ++c) {
    out += "x" + std::to_string(c) + ",";
  }
  out += "a";
  for (int j = 1; j <= dataset.outcome_dim(); ++j) {
    out += ",y" + std::to_string(j);
  }
  out += "\n";
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    for (double x : dataset.covariates(i)) out += Fixed6(x) + ",";
    out += std::to_string(dataset.action(i));
    for (double y : dataset.outcomes(i)) out += "," + Fixed6(y);
    out += "\n";
  }
  return out;
}

std::string TruthTableCsv(std::span<const TruthRow> rows) {
  std::string out = "policy_id,v1,v2,safe\n";
  char buf[160];
  for (const TruthRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%.9f,%.9f,%d\n", r.policy_id.c_str(),
                  r.value.v1, r.value.v2, r.safe ? 1 : 0);
    out += buf;
  }
  return out;
}

}  // namespace snpl
