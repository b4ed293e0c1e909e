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

// Policy-value estimation: inverse-propensity weighting, cross-fitted
// doubly-robust estimation, and the per-observation influence terms that the
// bound constructions consume.

#ifndef SNPL_ESTIMATORS_H_
#define SNPL_ESTIMATORS_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "snpl/core.h"
#include "snpl/rng.h"

namespace snpl {

enum class Estimator { kIpw, kDr };

// Outcome regressions mu_j(k, x), linear in the covariates with an intercept,
// fitted per (fold complement, arm, outcome). Predictions are clipped to
// [0, 1]. Every training row is predicted by the model that excluded its fold.
class NuisanceModel {
 public:
  // Ridge penalty used when a fold design matrix is singular.
  static constexpr double kRidgeFallback = 1e-8;

  // Rows are permuted with `rng` and cut into `folds` near-equal blocks.
  // Throws when some (fold complement, arm) cell has no rows.
  static NuisanceModel Fit(const Dataset& dataset, int folds, Rng& rng);
  // mu == value for every arm and outcome (value 0 turns DR into IPW).
  static NuisanceModel Constant(const Dataset& dataset, double value);

  double Predict(std::size_t row, int action, int outcome0) const {
    return predictions_[(row * num_actions_ + (action - 1)) * outcome_dim_ +
                        outcome0];
  }
  double PredictFromFold(int fold, int action, int outcome0,
                         std::span<const double> x) const;

  int num_folds() const { return num_folds_; }
  int fold_of(std::size_t row) const { return fold_of_[row]; }
  // Rows the fold-`fold` model was trained on.
  std::size_t training_size(int fold) const { return training_size_[fold]; }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  NuisanceModel() = default;
  std::size_t CoefOffset(int fold, int action, int outcome0) const;

  int num_folds_ = 0;
  int num_actions_ = 0;
  int outcome_dim_ = 0;
  int covariate_dim_ = 0;
  std::vector<int> fold_of_;
  std::vector<std::size_t> training_size_;
  // [fold][action][outcome] -> (intercept, slope_1..slope_d)
  std::vector<double> coefficients_;
  std::vector<double> predictions_;
  std::vector<std::string> warnings_;
};

// Per-observation, per-arm scores psi_jk(O_i): for IPW 1[A=k] Y_j / e(k, X),
// for DR 1[A=k] (Y_j - mu_j(k, X)) / e(k, X) + mu_j(k, X).
class PseudoOutcomes {
 public:
  static PseudoOutcomes Ipw(const Dataset& dataset);
  static PseudoOutcomes Dr(const Dataset& dataset, const NuisanceModel& mu);

  // n x d_Y matrix of psi_j(O_i, pi) = sum_k pi(k, X_i) psi_jk(O_i).
  Eigen::MatrixXd Scores(const Dataset& dataset, const Policy& policy) const;

  Estimator estimator() const { return estimator_; }
  std::size_t size() const { return static_cast<std::size_t>(by_arm_[0].rows()); }

 private:
  PseudoOutcomes(Estimator estimator, std::vector<Eigen::MatrixXd> by_arm)
      : estimator_(estimator), by_arm_(std::move(by_arm)) {}

  Estimator estimator_;
  std::vector<Eigen::MatrixXd> by_arm_;  // K matrices, each n x d_Y
};

// Value of `policy` on outcome j (1-based).
double IpwValue(const Dataset& dataset, const Policy& policy, int outcome);
double DrValue(const Dataset& dataset, const Policy& policy, int outcome,
               const NuisanceModel& nuisance);

// d_j(O_i, pi) = psi_j(O_i, pi) - (1 + w_j) psi_j(O_i, pi0) for a policy list
// and guardrail set. Column p * |S| + s (0-based) holds (policy p, guardrail
// s); `estimates` holds the column means D_j(pi).
struct InfluenceTable {
  Eigen::MatrixXd values;
  Eigen::VectorXd estimates;
  std::vector<std::string> policy_ids;
  std::size_t num_guardrails = 0;

  std::size_t num_policies() const { return policy_ids.size(); }
  std::size_t num_rows() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t column(std::size_t policy, std::size_t guardrail) const {
    return policy * num_guardrails + guardrail;
  }
};

// Evaluates candidate policies against a fixed baseline on one dataset,
// reusing the pseudo-outcomes and the baseline scores. The dataset must
// outlive the evaluator.
class PolicyEvaluator {
 public:
  PolicyEvaluator(const Dataset& dataset, PseudoOutcomes pseudo,
                  const Policy& baseline, const SafetySpec& spec);

  struct Columns {
    Eigen::MatrixXd influence;  // n x |S|
    double goal = 0.0;          // V_g(pi)
  };

  // n x |S| block of influence values for one policy.
  Eigen::MatrixXd InfluenceColumns(const Policy& policy) const;
  // Influence block and goal value from one pass over the data.
  Columns Evaluate(const Policy& policy) const;
  // Goal value V_g(pi).
  double GoalValue(const Policy& policy) const;
  double BaselineGoalValue() const { return baseline_goal_; }
  double BaselineValue(int outcome) const;

  InfluenceTable Table(std::span<const PolicyPtr> policies) const;
  InfluenceTable TableFromBlocks(std::span<const Eigen::MatrixXd> blocks,
                                 std::vector<std::string> ids) const;

  const Dataset& dataset() const { return *dataset_; }
  const SafetySpec& spec() const { return spec_; }
  const PseudoOutcomes& pseudo() const { return pseudo_; }

 private:
  const Dataset* dataset_;  // not owned
  SafetySpec spec_;
  PseudoOutcomes pseudo_;
  Eigen::MatrixXd baseline_scores_;  // n x d_Y
  double baseline_goal_;
};

// `nuisance` is required for Estimator::kDr and ignored for kIpw.
InfluenceTable BuildInfluenceTable(const Dataset& dataset,
                                   std::span<const PolicyPtr> policies,
                                   const Policy& baseline,
                                   const SafetySpec& spec, Estimator estimator,
                                   const NuisanceModel* nuisance = nullptr);

// (1/n) sum (v_i - mean)^2. Throws for n < 2.
double EmpiricalVariance(std::span<const double> column);
double EmpiricalVariance(const Eigen::Ref<const Eigen::VectorXd>& column);

// (1/n) centered cross-products of the table columns; exactly symmetric.
Eigen::MatrixXd EmpiricalCovariance(const InfluenceTable& table);

}  // namespace snpl

#endif  // SNPL_ESTIMATORS_H_
