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

#include "snpl/core.h"

#include <algorithm>
#include <cmath>
#include <utility>

namespace snpl {
namespace {

constexpr double kSumTolerance = 1e-9;

std::string AtRow(const std::string& what, std::size_t row) {
  return what + " at row " + std::to_string(row);
}

}  // namespace

ValidationError::ValidationError(const std::string& message,
                                 std::optional<std::size_t> row)
    : Error(message), row_(row) {}

PropensityModel::PropensityModel(int num_actions, Fn fn, double floor)
    : num_actions_(num_actions), fn_(std::move(fn)), floor_(floor) {
  if (num_actions < 1) throw ValidationError("propensity model needs K >= 1");
  if (!(floor > 0.0 && floor < 1.0)) {
    throw ValidationError("positivity floor must lie in (0, 1)");
  }
}

PropensityModel PropensityModel::Constant(std::vector<double> probs,
                                          double floor) {
  const int k = static_cast<int>(probs.size());
  return PropensityModel(
      k,
      [probs = std::move(probs)](int action, std::span<const double>) {
        return probs[action - 1];
      },
      floor);
}

PropensityModel PropensityModel::Uniform(int num_actions) {
  const double p = 1.0 / num_actions;
  return Constant(std::vector<double>(num_actions, p), p);
}

Dataset::Dataset(const std::vector<Observation>& observations,
                 const PropensityModel& model) {
  num_actions_ = model.num_actions();
  floor_ = model.floor();
  Load(observations);
  propensities_.resize(size() * num_actions_);
  for (std::size_t i = 0; i < size(); ++i) {
    for (int k = 1; k <= num_actions_; ++k) {
      propensities_[i * num_actions_ + (k - 1)] = model(k, covariates(i));
    }
  }
}

Dataset::Dataset(const std::vector<Observation>& observations,
                 int num_actions, std::vector<double> propensities,
                 double floor) {
  num_actions_ = num_actions;
  floor_ = floor;
  if (num_actions < 1) throw ValidationError("dataset needs K >= 1");
  if (!(floor > 0.0 && floor < 1.0)) {
    throw ValidationError("positivity floor must lie in (0, 1)");
  }
  Load(observations);
  if (propensities.size() != size() * static_cast<std::size_t>(num_actions)) {
    throw ValidationError("propensity table has " +
                          std::to_string(propensities.size()) +
                          " entries, expected n*K");
  }
  propensities_ = std::move(propensities);
}

void Dataset::Load(const std::vector<Observation>& observations) {
  if (observations.empty()) throw ValidationError("dataset is empty");
  covariate_dim_ = static_cast<int>(observations.front().covariates.size());
  outcome_dim_ = static_cast<int>(observations.front().outcomes.size());
  if (outcome_dim_ < 1) throw ValidationError("dataset has no outcomes", 0);
  covariates_.reserve(observations.size() * covariate_dim_);
  outcomes_.reserve(observations.size() * outcome_dim_);
  actions_.reserve(observations.size());
  for (std::size_t i = 0; i < observations.size(); ++i) {
    const Observation& o = observations[i];
    if (static_cast<int>(o.covariates.size()) != covariate_dim_ ||
        static_cast<int>(o.outcomes.size()) != outcome_dim_) {
      throw ValidationError(AtRow("dimension mismatch", i), i);
    }
    covariates_.insert(covariates_.end(), o.covariates.begin(),
                       o.covariates.end());
    outcomes_.insert(outcomes_.end(), o.outcomes.begin(), o.outcomes.end());
    actions_.push_back(o.action);
  }
}

Observation Dataset::observation(std::size_t row) const {
  const auto x = covariates(row);
  const auto y = outcomes(row);
  return Observation{{x.begin(), x.end()}, action(row), {y.begin(), y.end()}};
}

Dataset Dataset::Subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.covariate_dim_ = covariate_dim_;
  out.outcome_dim_ = outcome_dim_;
  out.num_actions_ = num_actions_;
  out.floor_ = floor_;
  out.covariates_.reserve(rows.size() * covariate_dim_);
  out.outcomes_.reserve(rows.size() * outcome_dim_);
  out.propensities_.reserve(rows.size() * num_actions_);
  for (std::size_t r : rows) {
    const auto x = covariates(r);
    const auto y = outcomes(r);
    out.covariates_.insert(out.covariates_.end(), x.begin(), x.end());
    out.outcomes_.insert(out.outcomes_.end(), y.begin(), y.end());
    out.actions_.push_back(actions_[r]);
    const auto e = propensities_.begin() + r * num_actions_;
    out.propensities_.insert(out.propensities_.end(), e, e + num_actions_);
  }
  return out;
}

void ValidateDataset(const Dataset& dataset) {
  if (dataset.size() == 0) throw ValidationError("dataset is empty");
  const int k_count = dataset.num_actions();
  const double floor = dataset.positivity_floor();
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const int a = dataset.action(i);
    if (a < 1 || a > k_count) {
      throw ValidationError(AtRow("action out of range", i), i);
    }
    for (double y : dataset.outcomes(i)) {
      if (!(y >= 0.0 && y <= 1.0)) {
        throw ValidationError(AtRow("outcome out of range", i), i);
      }
    }
    double total = 0.0;
    for (int k = 1; k <= k_count; ++k) {
      const double e = dataset.propensity(i, k);
      if (!(e >= floor)) {
        throw ValidationError(AtRow("positivity violated", i), i);
      }
      total += e;
    }
    if (std::abs(total - 1.0) > kSumTolerance) {
      throw ValidationError(AtRow("propensities do not sum to one", i), i);
    }
  }
}

std::vector<double> ActionDistribution(const Policy& policy,
                                       std::span<const double> x) {
  if (static_cast<int>(x.size()) < policy.required_dim()) {
    throw ValidationError("dimension mismatch: policy " + policy.id() +
                          " needs " + std::to_string(policy.required_dim()) +
                          " covariates, got " + std::to_string(x.size()));
  }
  std::vector<double> probs(policy.num_actions());
  policy.Evaluate(x, probs);
  double total = 0.0;
  for (double p : probs) {
    if (p < 0.0) throw Error("policy " + policy.id() + " returned p < 0");
    total += p;
  }
  if (std::abs(total - 1.0) > kSumTolerance) {
    throw Error("policy " + policy.id() + " is not normalized");
  }
  return probs;
}

std::string UniformPolicy::id() const {
  return "uniform-" + std::to_string(num_actions_);
}

void UniformPolicy::Evaluate(std::span<const double>,
                             std::span<double> out) const {
  std::fill(out.begin(), out.end(), 1.0 / num_actions_);
}

FixedActionPolicy::FixedActionPolicy(int num_actions, int action)
    : num_actions_(num_actions), action_(action) {
  if (action < 1 || action > num_actions) {
    throw ValidationError("fixed action out of range");
  }
}

std::string FixedActionPolicy::id() const {
  return "action-" + std::to_string(action_);
}

void FixedActionPolicy::Evaluate(std::span<const double>,
                                 std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  out[action_ - 1] = 1.0;
}

std::string ToString(BoundSense sense) {
  return sense == BoundSense::kLower ? "lower" : "upper";
}

std::string ToString(Mode mode) {
  return mode == Mode::kFinite ? "finite" : "asymptotic";
}

Mode ParseMode(const std::string& text) {
  if (text == "finite") return Mode::kFinite;
  if (text == "asymptotic") return Mode::kAsymptotic;
  throw ValidationError("unknown mode '" + text + "'");
}

BoundSense ParseSense(const std::string& text) {
  if (text == "lower") return BoundSense::kLower;
  if (text == "upper") return BoundSense::kUpper;
  throw ValidationError("unknown bound sense '" + text + "'");
}

double SafetySpec::max_weight() const {
  return *std::max_element(weights.begin(), weights.end());
}

void SafetySpec::Validate(int outcome_dim) const {
  if (guardrails.empty()) throw ValidationError("guardrail set S is empty");
  if (weights.size() != guardrails.size()) {
    throw ValidationError("w has " + std::to_string(weights.size()) +
                          " entries but |S| = " +
                          std::to_string(guardrails.size()));
  }
  if (!senses.empty() && senses.size() != guardrails.size()) {
    throw ValidationError("senses must align with S");
  }
  if (goal < 1 || goal > outcome_dim) {
    throw ValidationError("goal index out of range");
  }
  for (int j : guardrails) {
    if (j < 1 || j > outcome_dim) {
      throw ValidationError("guardrail index " + std::to_string(j) +
                            " out of range");
    }
  }
  for (double w : weights) {
    if (!(w <= 0.0)) throw ValidationError("guardrail weights must be <= 0");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ValidationError("alpha must lie in (0, 1)");
  }
}

void Hyperparams::Validate() const {
  if (!(gamma > 0.0)) throw ValidationError("gamma must be > 0");
  if (eta && *eta < 1) throw ValidationError("eta must be >= 1");
  if (B && !(*B > 0.0)) throw ValidationError("B must be > 0");
  if (epsilon && !(*epsilon > 0.0)) {
    throw ValidationError("epsilon must be > 0");
  }
  if (!(p < 1.0)) throw ValidationError("p must be < 1");
  if (n_sim < 1 || n_sim_in_loop < 1) {
    throw ValidationError("n_sim must be >= 1");
  }
  if (folds < 2) throw ValidationError("folds must be >= 2");
}

}  // namespace snpl
