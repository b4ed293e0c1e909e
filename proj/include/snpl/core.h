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

// Domain types shared by every module: observations, datasets with a known
// logging propensity, policies, and the safety specification.
//
// Indexing convention: actions, outcome indices and guardrail indices are
// 1-based everywhere in the public interface. Raw storage accessors that take
// a `*0` suffixed index are 0-based.

#ifndef SNPL_CORE_H_
#define SNPL_CORE_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace snpl {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a dataset, config or spec violates an invariant. Carries the
// offending row when the violation is row-specific.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message,
                           std::optional<std::size_t> row = std::nullopt);

  std::optional<std::size_t> row() const { return row_; }

 private:
  std::optional<std::size_t> row_;
};

struct Observation {
  std::vector<double> covariates;
  int action = 1;  // in {1..K}
  std::vector<double> outcomes;  // each in [0, 1]
};

// Known logging propensity e(k, x) with positivity floor c.
class PropensityModel {
 public:
  using Fn = std::function<double(int action, std::span<const double> x)>;

  PropensityModel(int num_actions, Fn fn, double floor);

  // e(k, x) = probs[k-1] for every x.
  static PropensityModel Constant(std::vector<double> probs, double floor);
  static PropensityModel Uniform(int num_actions);

  double operator()(int action, std::span<const double> x) const {
    return fn_(action, x);
  }
  int num_actions() const { return num_actions_; }
  double floor() const { return floor_; }

 private:
  int num_actions_;
  Fn fn_;
  double floor_;
};

// Column-oriented store of n observations. Construction only checks shapes;
// ValidateDataset() enforces the value-level invariants.
class Dataset {
 public:
  // Propensities evaluated from `model` at every observed covariate vector.
  Dataset(const std::vector<Observation>& observations,
          const PropensityModel& model);
  // Logged per-row propensities, row-major n x K.
  Dataset(const std::vector<Observation>& observations, int num_actions,
          std::vector<double> propensities, double floor);

  std::size_t size() const { return actions_.size(); }
  int covariate_dim() const { return covariate_dim_; }
  int outcome_dim() const { return outcome_dim_; }
  int num_actions() const { return num_actions_; }
  double positivity_floor() const { return floor_; }

  std::span<const double> covariates(std::size_t row) const {
    return {covariates_.data() + row * covariate_dim_,
            static_cast<std::size_t>(covariate_dim_)};
  }
  int action(std::size_t row) const { return actions_[row]; }
  double outcome0(std::size_t row, int j0) const {
    return outcomes_[row * outcome_dim_ + j0];
  }
  std::span<const double> outcomes(std::size_t row) const {
    return {outcomes_.data() + row * outcome_dim_,
            static_cast<std::size_t>(outcome_dim_)};
  }
  // e(k, X_row) for action k in {1..K}.
  double propensity(std::size_t row, int action) const {
    return propensities_[row * num_actions_ + (action - 1)];
  }

  Observation observation(std::size_t row) const;

  // Rows in the given order; propensities are carried over.
  Dataset Subset(std::span<const std::size_t> rows) const;

 private:
  Dataset() = default;
  void Load(const std::vector<Observation>& observations);

  int covariate_dim_ = 0;
  int outcome_dim_ = 0;
  int num_actions_ = 0;
  double floor_ = 0.0;
  std::vector<double> covariates_;
  std::vector<int> actions_;
  std::vector<double> outcomes_;
  std::vector<double> propensities_;
};

// Throws ValidationError (with row index) on: outcome outside [0, 1], action
// outside {1..K}, propensity below the floor ("positivity violated"), or
// propensities that do not sum to one. Pure.
void ValidateDataset(const Dataset& dataset);

// A stochastic policy over K actions.
class Policy {
 public:
  virtual ~Policy() = default;

  virtual std::string id() const = 0;
  virtual int num_actions() const = 0;
  // Smallest covariate dimension the policy can be evaluated on.
  virtual int required_dim() const { return 0; }
  // Writes pi(k, x) into out[k-1]; out.size() == num_actions().
  virtual void Evaluate(std::span<const double> x,
                        std::span<double> out) const = 0;
};

using PolicyPtr = std::shared_ptr<const Policy>;

// pi(., x), checked for dimension and normalization (1e-9).
std::vector<double> ActionDistribution(const Policy& policy,
                                       std::span<const double> x);

class UniformPolicy : public Policy {
 public:
  explicit UniformPolicy(int num_actions) : num_actions_(num_actions) {}
  std::string id() const override;
  int num_actions() const override { return num_actions_; }
  void Evaluate(std::span<const double> x,
                std::span<double> out) const override;

 private:
  int num_actions_;
};

// Always plays one action.
class FixedActionPolicy : public Policy {
 public:
  FixedActionPolicy(int num_actions, int action);
  std::string id() const override;
  int num_actions() const override { return num_actions_; }
  void Evaluate(std::span<const double> x,
                std::span<double> out) const override;

 private:
  int num_actions_;
  int action_;
};

enum class BoundSense { kLower, kUpper };

enum class Mode { kFinite, kAsymptotic };

std::string ToString(BoundSense sense);
std::string ToString(Mode mode);
Mode ParseMode(const std::string& text);
BoundSense ParseSense(const std::string& text);

// Goal outcome g, guardrails S with weights w_j <= 0, level alpha. A lower
// guardrail is certified when V_j(pi) - (1 + w_j) V_j(pi0) >= 0, an upper one
// when the same difference is <= 0.
struct SafetySpec {
  int goal = 1;
  std::vector<int> guardrails;
  std::vector<double> weights;
  double alpha = 0.1;
  std::vector<BoundSense> senses;  // empty means all lower

  std::size_t num_guardrails() const { return guardrails.size(); }
  BoundSense sense(std::size_t s) const {
    return senses.empty() ? BoundSense::kLower : senses[s];
  }
  double max_weight() const;

  void Validate(int outcome_dim) const;
};

struct Hyperparams {
  double gamma = 0.1;
  std::optional<int> eta;          // default: eta heuristic
  std::optional<double> B;         // default: theorem floor for the mode
  std::optional<double> epsilon;   // default: gamma / sqrt(n)
  double p = 0.5;
  int n_sim = 100000;
  int n_sim_in_loop = 10000;
  int folds = 5;
  std::uint64_t seed = 0;

  void Validate() const;
};

}  // namespace snpl

#endif  // SNPL_CORE_H_
