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

// Joint confidence bounds on weighted policy-value differences
//   D_j(pi) = V_j(pi) - (1 + w_j) V_j(pi0)
// over a policy set and guardrail set: finite-sample empirical-Bernstein
// bounds with a union correction, simulated sup-t bounds, and per-coordinate
// normal-quantile bounds.
//
// Lower-sense guardrails get bound = estimate - width; upper-sense guardrails
// get bound = estimate + width. A coordinate certifies when its margin (the
// bound, negated for upper sense) is strictly positive.

#ifndef SNPL_BOUNDS_H_
#define SNPL_BOUNDS_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "snpl/core.h"
#include "snpl/estimators.h"

namespace snpl {

enum class BoundMethod { kFinite, kAsymptotic, kNormalQuantile };

std::string ToString(BoundMethod method);

struct BoundEntry {
  std::string policy_id;
  int guardrail = 1;  // outcome index (1-based)
  BoundSense sense = BoundSense::kLower;
  double estimate = 0.0;
  double width = 0.0;
  double bound = 0.0;

  double margin() const {
    return sense == BoundSense::kLower ? bound : -bound;
  }
};

struct LowerBoundTable {
  std::vector<BoundEntry> entries;  // policy-major, InfluenceTable order
  std::size_t num_policies = 0;
  std::size_t num_guardrails = 0;
  double level = 0.0;
  BoundMethod method = BoundMethod::kFinite;
  // Union size |Pi~| * |S| the level was split over (finite, normal quantile)
  // or the sup-t dimension.
  std::size_t correction_size = 0;
  // log(3 |Pi~| |S| / (2 level)) for finite bounds, z* for sup-t bounds, the
  // normal quantile for normal-quantile bounds.
  double critical_value = 0.0;

  const BoundEntry& at(std::size_t policy, std::size_t guardrail) const {
    return entries[policy * num_guardrails + guardrail];
  }
  // min over guardrails of the certification margin.
  double MinMargin(std::size_t policy) const;
  bool Certifies(std::size_t policy) const { return MinMargin(policy) > 0.0; }
};

struct SupTQuantile {
  double z_star = 0.0;
  int n_sim = 0;
  std::uint64_t seed = 0;
};

// Empirical-Bernstein bounds with union size `assumed_class_size` * |S|:
//   width = sigma * sqrt(2 L / n) + 3 R_j L / n,  L = log(3 |Pi~| |S| / (2 level)),
//   R_j = (2 + w_j) / c.
LowerBoundTable FiniteBounds(const InfluenceTable& table, const SafetySpec& spec,
                             double level, std::size_t assumed_class_size,
                             double positivity_floor);

// Lower `level`-quantile of min_j rho_j / sqrt(cov_jj) over `n_sim` draws
// rho ~ N(0, cov). Coordinates with zero variance are left out; an all-zero
// covariance throws. The order statistic at ceil(level * n_sim) is returned.
SupTQuantile ComputeSupTQuantile(const Eigen::MatrixXd& cov, double level,
                                 int n_sim, std::uint64_t seed);

// Sup-t bounds: bound = estimate + z* sqrt(cov_jj / n) (lower sense). Upper
// guardrails enter the simulation with flipped sign, so the joint event covers
// both senses.
LowerBoundTable AsymptoticBounds(const InfluenceTable& table,
                                 const SafetySpec& spec, double level,
                                 int n_sim, std::uint64_t seed);

// Per-coordinate normal bounds at per-test level `per_test_level`:
// width = Phi^{-1}(1 - per_test_level) sqrt(var_j / n).
LowerBoundTable NormalQuantileBounds(const InfluenceTable& table,
                                     const SafetySpec& spec,
                                     double per_test_level,
                                     std::size_t correction_size);

}  // namespace snpl

#endif  // SNPL_BOUNDS_H_
