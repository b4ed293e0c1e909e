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

// Noisy safe policy learning: prune the policy class with the sparse vector
// technique on noisy minimum lower bounds, re-certify the pruned set at the
// stability-corrected level, and return the best certified policy (or the
// baseline).

#ifndef SNPL_SNPL_H_
#define SNPL_SNPL_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "snpl/bounds.h"
#include "snpl/core.h"
#include "snpl/estimators.h"
#include "snpl/stability.h"

namespace snpl {

// In-loop bound for asymptotic mode. kBonferroniNormal uses the per-coordinate
// quantile Phi^{-1}(1 - alpha' / (eta |S|)); kSupT simulates over the current
// pruned set plus the candidate.
enum class InLoopBound { kSupT, kBonferroniNormal };

std::string ToString(InLoopBound bound);
InLoopBound ParseInLoopBound(const std::string& text);

// Order in which the class is scanned: as declared, or a seeded permutation.
enum class ScanOrder { kDeclared, kShuffled };

std::string ToString(ScanOrder order);
ScanOrder ParseScanOrder(const std::string& text);

struct SnplConfig {
  SafetySpec spec;
  Hyperparams hyper;
  Mode mode = Mode::kAsymptotic;
  InLoopBound in_loop = InLoopBound::kBonferroniNormal;
  PolicyPtr baseline;
  ScanOrder scan_order = ScanOrder::kDeclared;
};

// Outcome of any selection method. class_index is empty for the baseline.
struct Decision {
  std::string policy_id;
  bool is_baseline = true;
  std::optional<std::size_t> class_index;
  double goal_estimate = 0.0;
  double baseline_goal_estimate = 0.0;
};

struct ScanRecord {
  std::size_t class_index = 0;
  std::string policy_id;
  std::vector<double> estimates;       // D_j per guardrail
  std::vector<double> in_loop_bounds;  // one per guardrail
  double m_prime = 0.0;                // min certification margin
  double noise = 0.0;
  bool admitted = false;
};

struct SnplSeeds {
  std::uint64_t master = 0;
  std::uint64_t nuisance = 0;
  std::uint64_t noise = 0;
  std::uint64_t final_supt = 0;
  std::uint64_t scan_order = 0;
};

struct SnplTrace {
  Mode mode = Mode::kAsymptotic;
  InLoopBound in_loop = InLoopBound::kBonferroniNormal;
  ScanOrder scan_order = ScanOrder::kDeclared;
  std::size_t n = 0;
  std::size_t class_size = 0;
  int eta = 1;
  StabilityBudget budget;
  SensitivityConstants sensitivity;
  double threshold_scale = 0.0;  // 2 B eta / eps
  double query_scale = 0.0;      // 4 B eta / eps
  double threshold = 0.0;        // v
  std::vector<ScanRecord> scans;
  std::vector<std::size_t> pruned;  // class indices, admission order
  std::vector<double> baseline_values;  // V_j(pi0), one per guardrail
  LowerBoundTable final_bounds;
  std::vector<double> final_margins;   // aligned with pruned
  std::vector<double> goal_estimates;  // aligned with pruned
  Decision decision;
  SnplSeeds seeds;
  std::vector<std::string> warnings;
};

// Seed stream labels for the randomness consumed by the algorithm.
SnplSeeds DeriveSnplSeeds(std::uint64_t master);

// The baseline is never scanned: class members whose id equals the baseline
// id are skipped. Throws on an empty class or a user B below the floor.
SnplTrace RunSnpl(const Dataset& dataset,
                  std::span<const PolicyPtr> policy_class,
                  const SnplConfig& config);

// Per-guardrail in-loop bounds for one candidate. `candidate` is n x |S|;
// `pruned` holds the blocks admitted so far (used by kSupT only).
std::vector<double> InLoopBounds(const Eigen::MatrixXd& candidate,
                                 std::span<const Eigen::MatrixXd> pruned,
                                 const SnplConfig& config, double alpha_prime,
                                 int eta, double positivity_floor,
                                 std::uint64_t supt_seed);

// Final joint certification over exactly the pruned set. Ties on the goal
// estimate go to the earliest admitted policy.
struct Certification {
  LowerBoundTable bounds;
  std::vector<double> margins;
  std::vector<double> goal_estimates;
  std::optional<std::size_t> winner;  // index into the pruned list
};

Certification FinalCertify(const PolicyEvaluator& evaluator,
                           std::span<const PolicyPtr> pruned_policies,
                           std::span<const Eigen::MatrixXd> pruned_blocks,
                           Mode mode, double level, int n_sim,
                           std::uint64_t supt_seed);

// argmax of goal estimates among strictly positive margins; first wins ties.
std::optional<std::size_t> SelectCertified(std::span<const double> margins,
                                           std::span<const double> goals);

}  // namespace snpl

#endif  // SNPL_SNPL_H_
