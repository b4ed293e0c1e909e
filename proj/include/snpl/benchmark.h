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

// Method dispatch, replicated synthetic benchmark, metrics and report files.

#ifndef SNPL_BENCHMARK_H_
#define SNPL_BENCHMARK_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "snpl/config.h"
#include "snpl/core.h"
#include "snpl/snpl.h"

namespace snpl {

struct MethodRun {
  Decision decision;
  nlohmann::json trace;
};

struct MethodOptions {
  SafetySpec spec;
  Hyperparams hyper;  // hyper.seed is the method seed
  Mode mode = Mode::kAsymptotic;
  InLoopBound in_loop = InLoopBound::kBonferroniNormal;
  ScanOrder scan_order = ScanOrder::kDeclared;
};

MethodRun RunMethod(const MethodTag& tag, const Dataset& dataset,
                    std::span<const PolicyPtr> policies,
                    const PolicyPtr& baseline, const MethodOptions& options);

// Figure data: for each guardrail j, `est_yj` is (V_j(pi) - V_j(pi0)) /
// V_j(pi0) from the estimates and `bound_yj` is the matching bound on that
// relative change, so a lower guardrail certifies when bound_yj > w_j. The
// baseline row sits at the origin. Unscanned policies have empty cells.
std::string BoundsScatterCsv(const MethodTag& tag, const Dataset& dataset,
                             std::span<const PolicyPtr> policies,
                             const PolicyPtr& baseline,
                             const MethodOptions& options);

struct ReplicationRecord {
  int replication = 0;
  std::uint64_t seed = 0;
  std::string method;
  std::string policy_id;
  bool is_baseline = true;
  bool safe = true;       // oracle safety of the returned policy
  double gain = 0.0;      // V_g(pi hat) - V_g(pi0), true values
};

struct MethodSummary {
  std::string method;
  int reps = 0;
  int detections = 0;
  int violations = 0;
  double detection = 0.0;
  double detection_se = 0.0;
  std::optional<double> type1;  // empty with no non-baseline returns
  std::optional<double> type1_se;
  double ei = 0.0;  // unconditional mean gain
  double ei_se = 0.0;
  double relative_ei = 0.0;  // mean gain / V_g(pi0)
  double relative_ei_se = 0.0;
  double wall_seconds = 0.0;  // summed over workers
};

struct BenchmarkReport {
  std::vector<MethodSummary> methods;
  std::vector<ReplicationRecord> records;  // replication-major
  double baseline_goal_value = 0.0;
  std::size_t class_size = 0;
  double wall_seconds = 0.0;
};

// SNPL_THREADS caps the pool; unset means hardware concurrency.
int WorkerCount();

// seed_r = DeriveSeed(master, r); data from DeriveSeed(seed_r, "data"); each
// method from DeriveSeed(seed_r, tag). Aggregation ignores execution order.
BenchmarkReport RunBenchmark(const BenchmarkConfig& config,
                             int threads = WorkerCount());

MethodSummary Summarize(const std::string& method,
                        std::span<const ReplicationRecord> records,
                        double baseline_goal_value);

// method,detection,detection_se,type1,type1_se,ei,ei_se,reps
std::string ReportCsv(const BenchmarkReport& report);
std::string DecisionsCsv(const BenchmarkReport& report);
nlohmann::json ReportJson(const BenchmarkReport& report,
                          const BenchmarkConfig& config);

}  // namespace snpl

#endif  // SNPL_BENCHMARK_H_
