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

// JSON configuration documents for single runs and benchmarks.

#ifndef SNPL_CONFIG_H_
#define SNPL_CONFIG_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "snpl/core.h"
#include "snpl/snpl.h"
#include "snpl/synthetic.h"

namespace snpl {

inline constexpr int kSchemaVersion = 1;

// "snpl", "bonferroni" or "ds-<percent>" (ds-25, ds-50, ds-75, ...).
struct MethodTag {
  std::string name;
  double rho = 0.0;  // data-splitting learning fraction

  bool is_snpl() const { return name == "snpl"; }
  bool is_bonferroni() const { return name == "bonferroni"; }
  bool is_split() const { return rho > 0.0; }

  static MethodTag Parse(const std::string& text);
};

struct ThresholdSpec {
  Feature feature = Feature::kG1;
  double cutoff = 0.5;
};

// Explicit threshold policies, or a grid over the listed features.
struct PolicyClassSpec {
  std::vector<Feature> features = {Feature::kG1, Feature::kG2, Feature::kG3,
                                   Feature::kG4, Feature::kG5};
  int grid_size = 100;
  ClassOrder order = ClassOrder::kCutoffMajor;
  std::vector<ThresholdSpec> policies;

  std::vector<PolicyPtr> Build() const;
};

struct RunConfig {
  MethodTag method = MethodTag::Parse("snpl");
  Mode mode = Mode::kAsymptotic;
  InLoopBound in_loop = InLoopBound::kBonferroniNormal;
  ScanOrder scan_order = ScanOrder::kDeclared;
  SafetySpec spec = SyntheticSpec();
  Hyperparams hyper;
  int num_actions = 2;
  // Constant propensities per arm; empty means e1..eK columns in the data.
  std::vector<double> propensity;
  double positivity_floor = 0.5;
  PolicyClassSpec policy_class;
  ThresholdSpec baseline;
};

struct BenchmarkConfig {
  std::vector<MethodTag> methods;
  Mode mode = Mode::kAsymptotic;
  InLoopBound in_loop = InLoopBound::kBonferroniNormal;
  ScanOrder scan_order = ScanOrder::kDeclared;
  std::size_t n = 1000;
  int replications = 300;
  int grid_size = 500;
  ClassOrder class_order = ClassOrder::kCutoffMajor;
  SafetySpec spec = SyntheticSpec();
  Hyperparams hyper;
  std::uint64_t master_seed = 0;

  void Validate() const;
};

// Unknown keys are rejected; missing keys take the defaults above.
RunConfig ParseRunConfig(const nlohmann::json& doc);
BenchmarkConfig ParseBenchmarkConfig(const nlohmann::json& doc);
nlohmann::json ToJson(const RunConfig& config);
nlohmann::json ToJson(const BenchmarkConfig& config);
nlohmann::json ToJson(const SafetySpec& spec);
nlohmann::json ToJson(const Hyperparams& hyper);

nlohmann::json ReadJsonFile(const std::string& path);

}  // namespace snpl

#endif  // SNPL_CONFIG_H_
