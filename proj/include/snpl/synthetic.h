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

// Synthetic benchmark: three uniform covariates, a fair coin treatment and two
// binary outcomes
//   Y1 ~ Bern(0.5 (1 - 1[A=1] X2)),  Y2 ~ Bern(0.5 (1 + 1[A=1] X1 X3)),
// threshold policy classes over five feature maps, and exact policy values.

#ifndef SNPL_SYNTHETIC_H_
#define SNPL_SYNTHETIC_H_

#include <cstddef>
#include <string>
#include <vector>

#include "snpl/core.h"
#include "snpl/rng.h"

namespace snpl {

enum class Feature { kG1, kG2, kG3, kG4, kG5, kX3 };

std::string ToString(Feature feature);
Feature ParseFeature(const std::string& text);  // "g1".."g5", "x1".."x3"

// pi(x) = 1[g(x) < cutoff]: action 1 (treat) when selected, action 2
// otherwise. g1 = x1, g2 = x2, g3 = x1 x2, g4 = x1 x2 x3, g5 = -x1 x2 x3.
class ThresholdPolicy : public Policy {
 public:
  ThresholdPolicy(Feature feature, double cutoff);

  std::string id() const override;
  int num_actions() const override { return 2; }
  int required_dim() const override;
  void Evaluate(std::span<const double> x,
                std::span<double> out) const override;

  bool Treats(std::span<const double> x) const {
    return FeatureValue(x) < cutoff_;
  }
  double FeatureValue(std::span<const double> x) const;
  Feature feature() const { return feature_; }
  double cutoff() const { return cutoff_; }

 private:
  Feature feature_;
  double cutoff_;
};

// 1[x1 < 0.5].
std::shared_ptr<const ThresholdPolicy> SyntheticBaseline();
// goal 1, S = {1, 2}, w = (0, -0.1), alpha = 0.1.
SafetySpec SyntheticSpec();

// n draws; propensity e = 0.5 for both arms with floor 0.5.
Dataset GenerateSynthetic(std::size_t n, Rng& rng);

// Cutoff-major lists every feature at cutoff 0, then every feature at the
// next cutoff, and so on. Feature-major lists all cutoffs of g1 first.
enum class ClassOrder { kCutoffMajor, kFeatureMajor };

std::string ToString(ClassOrder order);
ClassOrder ParseClassOrder(const std::string& text);

// For each of g1..g5, `grid_size` cutoffs evenly spaced over [0, 1] with both
// endpoints.
std::vector<PolicyPtr> BuildThresholdClass(
    int grid_size, ClassOrder order = ClassOrder::kCutoffMajor);

struct TrueValue {
  double v1 = 0.0;
  double v2 = 0.0;

  double operator[](int outcome) const { return outcome == 1 ? v1 : v2; }
};

// Exact (V1, V2) by closed-form integration over the covariate law.
TrueValue TrueValues(const ThresholdPolicy& policy);

// V_j(pi) - (1 + w_j) V_j(pi0) >= 0 (<= 0 for upper sense) for every j in S.
bool OracleSafe(const TrueValue& policy, const TrueValue& baseline,
                const SafetySpec& spec);

struct TruthRow {
  std::string policy_id;
  TrueValue value;
  bool safe = false;
};

std::vector<TruthRow> BuildTruthTable(std::span<const PolicyPtr> policies,
                                      const ThresholdPolicy& baseline,
                                      const SafetySpec& spec);

// Header `x1,x2,x3,a,y1,y2`, 6-decimal floats.
std::string DatasetCsv(const Dataset& dataset);
// Header `policy_id,v1,v2,safe`.
std::string TruthTableCsv(std::span<const TruthRow> rows);

}  // namespace snpl

#endif  // SNPL_SYNTHETIC_H_
