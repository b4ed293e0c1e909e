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

#include "snpl/estimators.h"

#include <algorithm>
#include <numeric>
#include <utility>

namespace snpl {
namespace {

double Clip01(double v) { return std::clamp(v, 0.0, 1.0); }

// Mean computed as x0 + mean(x - x0) so a constant column is reproduced
// exactly.
double ShiftedMean(const Eigen::Ref<const Eigen::VectorXd>& v) {
  const double anchor = v(0);
  return anchor + (v.array() - anchor).mean();
}

}  // namespace

NuisanceModel NuisanceModel::Fit(const Dataset& dataset, int folds, Rng& rng) {
  if (folds < 2) throw ValidationError("cross-fitting needs at least 2 folds");
  const std::size_t n = dataset.size();
  if (n < static_cast<std::size_t>(folds)) {
    throw ValidationError("fewer rows (" + std::to_string(n) + ") than folds");
  }
  NuisanceModel model;
  model.num_folds_ = folds;
  model.num_actions_ = dataset.num_actions();
  model.outcome_dim_ = dataset.outcome_dim();
  model.covariate_dim_ = dataset.covariate_dim();
  const int d = model.covariate_dim_;
  const int dy = model.outcome_dim_;

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  model.fold_of_.assign(n, 0);
  for (std::size_t r = 0; r < n; ++r) {
    // Blocks of size floor(n/F) or ceil(n/F).
    model.fold_of_[perm[r]] = static_cast<int>(r * folds / n);
  }

  model.training_size_.assign(folds, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (int f = 0; f < folds; ++f) {
      if (model.fold_of_[i] != f) ++model.training_size_[f];
    }
  }

  model.coefficients_.assign(
      static_cast<std::size_t>(folds) * model.num_actions_ * dy * (d + 1), 0.0);

  for (int f = 0; f < folds; ++f) {
    for (int k = 1; k <= model.num_actions_; ++k) {
      std::vector<std::size_t> rows;
      for (std::size_t i = 0; i < n; ++i) {
        if (model.fold_of_[i] != f && dataset.action(i) == k) rows.push_back(i);
      }
      if (rows.empty()) {
        throw ValidationError("no training rows for arm " + std::to_string(k) +
                              " outside fold " + std::to_string(f + 1));
      }
      const Eigen::Index m = static_cast<Eigen::Index>(rows.size());
      Eigen::MatrixXd x(m, d);
      Eigen::MatrixXd y(m, dy);
      for (Eigen::Index r = 0; r < m; ++r) {
        const auto xi = dataset.covariates(rows[r]);
        for (int c = 0; c < d; ++c) x(r, c) = xi[c];
        for (int j = 0; j < dy; ++j) y(r, j) = dataset.outcome0(rows[r], j);
      }
      Eigen::RowVectorXd x_mean(d);
      for (int c = 0; c < d; ++c) x_mean(c) = ShiftedMean(x.col(c));
      Eigen::RowVectorXd y_mean(dy);
      for (int j = 0; j < dy; ++j) y_mean(j) = ShiftedMean(y.col(j));

      Eigen::MatrixXd slopes = Eigen::MatrixXd::Zero(d, dy);
      if (d > 0) {
        const Eigen::MatrixXd xc = x.rowwise() - x_mean;
        const Eigen::MatrixXd yc = y.rowwise() - y_mean;
        Eigen::MatrixXd gram = xc.transpose() * xc;
        const Eigen::MatrixXd rhs = xc.transpose() * yc;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
        const double scale = std::max(gram.diagonal().maxCoeff(), 1e-300);
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
            ldlt.vectorD().minCoeff() <= 1e-12 * scale) {
          model.warnings_.push_back(
              "singular design for arm " + std::to_string(k) + " outside fold " +
              std::to_string(f + 1) + "; using ridge penalty 1e-8");
          gram.diagonal().array() += kRidgeFallback;
          ldlt.compute(gram);
        }
        slopes = ldlt.solve(rhs);
      }
      for (int j = 0; j < dy; ++j) {
        double* coef = &model.coefficients_[model.CoefOffset(f, k, j)];
        // x_mean . slopes is exactly 0 when the slopes vanish.
        coef[0] = y_mean(j) - x_mean.dot(slopes.col(j));
        for (int c = 0; c < d; ++c) coef[c + 1] = slopes(c, j);
      }
    }
  }

  model.predictions_.resize(n * model.num_actions_ * dy);
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = 1; k <= model.num_actions_; ++k) {
      for (int j = 0; j < dy; ++j) {
        model.predictions_[(i * model.num_actions_ + (k - 1)) * dy + j] =
            model.PredictFromFold(model.fold_of_[i], k, j,
                                  dataset.covariates(i));
      }
    }
  }
  return model;
}

NuisanceModel NuisanceModel::Constant(const Dataset& dataset, double value) {
  NuisanceModel model;
  model.num_folds_ = 1;
  model.num_actions_ = dataset.num_actions();
  model.outcome_dim_ = dataset.outcome_dim();
  model.covariate_dim_ = dataset.covariate_dim();
  model.fold_of_.assign(dataset.size(), 0);
  model.training_size_.assign(1, dataset.size());
  model.coefficients_.assign(static_cast<std::size_t>(model.num_actions_) *
                                 model.outcome_dim_ * (model.covariate_dim_ + 1),
                             0.0);
  for (int k = 1; k <= model.num_actions_; ++k) {
    for (int j = 0; j < model.outcome_dim_; ++j) {
      model.coefficients_[model.CoefOffset(0, k, j)] = value;
    }
  }
  model.predictions_.assign(
      dataset.size() * model.num_actions_ * model.outcome_dim_, value);
  return model;
}

std::size_t NuisanceModel::CoefOffset(int fold, int action,
                                      int outcome0) const {
  return ((static_cast<std::size_t>(fold) * num_actions_ + (action - 1)) *
              outcome_dim_ +
          outcome0) *
         (covariate_dim_ + 1);
}

double NuisanceModel::PredictFromFold(int fold, int action, int outcome0,
                                      std::span<const double> x) const {
  const double* coef = &coefficients_[CoefOffset(fold, action, outcome0)];
  double v = coef[0];
  for (int c = 0; c < covariate_dim_; ++c) v += coef[c + 1] * x[c];
  return Clip01(v);
}

PseudoOutcomes PseudoOutcomes::Ipw(const Dataset& dataset) {
  const auto n = static_cast<Eigen::Index>(dataset.size());
  std::vector<Eigen::MatrixXd> by_arm(
      dataset.num_actions(), Eigen::MatrixXd::Zero(n, dataset.outcome_dim()));
  for (Eigen::Index i = 0; i < n; ++i) {
    const int a = dataset.action(i);
    const double inv_e = 1.0 / dataset.propensity(i, a);
    for (int j = 0; j < dataset.outcome_dim(); ++j) {
      by_arm[a - 1](i, j) = dataset.outcome0(i, j) * inv_e;
    }
  }
  return PseudoOutcomes(Estimator::kIpw, std::move(by_arm));
}

PseudoOutcomes PseudoOutcomes::Dr(const Dataset& dataset,
                                  const NuisanceModel& mu) {
  const auto n = static_cast<Eigen::Index>(dataset.size());
  const int dy = dataset.outcome_dim();
  std::vector<Eigen::MatrixXd> by_arm(dataset.num_actions(),
                                      Eigen::MatrixXd(n, dy));
  for (Eigen::Index i = 0; i < n; ++i) {
    const int a = dataset.action(i);
    for (int k = 1; k <= dataset.num_actions(); ++k) {
      for (int j = 0; j < dy; ++j) {
        const double m = mu.Predict(i, k, j);
        double v = m;
        if (k == a) v += (dataset.outcome0(i, j) - m) / dataset.propensity(i, k);
        by_arm[k - 1](i, j) = v;
      }
    }
  }
  return PseudoOutcomes(Estimator::kDr, std::move(by_arm));
}

Eigen::MatrixXd PseudoOutcomes::Scores(const Dataset& dataset,
                                       const Policy& policy) const {
  const auto n = static_cast<Eigen::Index>(dataset.size());
  const int k_count = dataset.num_actions();
  if (policy.num_actions() != k_count) {
    throw ValidationError("policy " + policy.id() + " has " +
                          std::to_string(policy.num_actions()) +
                          " actions, dataset has " + std::to_string(k_count));
  }
  if (dataset.covariate_dim() < policy.required_dim()) {
    throw ValidationError("dimension mismatch: policy " + policy.id() +
                          " needs " + std::to_string(policy.required_dim()) +
                          " covariates");
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, by_arm_[0].cols());
  std::vector<double> probs(k_count);
  for (Eigen::Index i = 0; i < n; ++i) {
    policy.Evaluate(dataset.covariates(i), probs);
    for (int k = 0; k < k_count; ++k) {
      if (probs[k] != 0.0) out.row(i) += probs[k] * by_arm_[k].row(i);
    }
  }
  return out;
}

double IpwValue(const Dataset& dataset, const Policy& policy, int outcome) {
  return PseudoOutcomes::Ipw(dataset)
      .Scores(dataset, policy)
      .col(outcome - 1)
      .mean();
}

double DrValue(const Dataset& dataset, const Policy& policy, int outcome,
               const NuisanceModel& nuisance) {
  return PseudoOutcomes::Dr(dataset, nuisance)
      .Scores(dataset, policy)
      .col(outcome - 1)
      .mean();
}

PolicyEvaluator::PolicyEvaluator(const Dataset& dataset, PseudoOutcomes pseudo,
                                 const Policy& baseline,
                                 const SafetySpec& spec)
    : dataset_(&dataset),
      spec_(spec),
      pseudo_(std::move(pseudo)),
      baseline_scores_(pseudo_.Scores(dataset, baseline)),
      baseline_goal_(baseline_scores_.col(spec.goal - 1).mean()) {
  spec_.Validate(dataset.outcome_dim());
}

Eigen::MatrixXd PolicyEvaluator::InfluenceColumns(const Policy& policy) const {
  return Evaluate(policy).influence;
}

PolicyEvaluator::Columns PolicyEvaluator::Evaluate(const Policy& policy) const {
  const Eigen::MatrixXd scores = pseudo_.Scores(*dataset_, policy);
  const auto s_count = static_cast<Eigen::Index>(spec_.num_guardrails());
  Columns out;
  out.influence.resize(scores.rows(), s_count);
  for (Eigen::Index s = 0; s < s_count; ++s) {
    const int j0 = spec_.guardrails[s] - 1;
    out.influence.col(s) =
        scores.col(j0) - (1.0 + spec_.weights[s]) * baseline_scores_.col(j0);
  }
  out.goal = scores.col(spec_.goal - 1).mean();
  return out;
}

double PolicyEvaluator::GoalValue(const Policy& policy) const {
  return pseudo_.Scores(*dataset_, policy).col(spec_.goal - 1).mean();
}

double PolicyEvaluator::BaselineValue(int outcome) const {
  return baseline_scores_.col(outcome - 1).mean();
}

InfluenceTable PolicyEvaluator::Table(
    std::span<const PolicyPtr> policies) const {
  std::vector<Eigen::MatrixXd> blocks;
  std::vector<std::string> ids;
  blocks.reserve(policies.size());
  for (const PolicyPtr& p : policies) {
    blocks.push_back(InfluenceColumns(*p));
    ids.push_back(p->id());
  }
  return TableFromBlocks(blocks, std::move(ids));
}

InfluenceTable PolicyEvaluator::TableFromBlocks(
    std::span<const Eigen::MatrixXd> blocks,
    std::vector<std::string> ids) const {
  const std::size_t s_count = spec_.num_guardrails();
  InfluenceTable table;
  table.num_guardrails = s_count;
  table.policy_ids = std::move(ids);
  table.values.resize(static_cast<Eigen::Index>(dataset_->size()),
                      static_cast<Eigen::Index>(blocks.size() * s_count));
  for (std::size_t p = 0; p < blocks.size(); ++p) {
    table.values.middleCols(static_cast<Eigen::Index>(p * s_count),
                            static_cast<Eigen::Index>(s_count)) = blocks[p];
  }
  table.estimates = table.values.colwise().mean().transpose();
  return table;
}

InfluenceTable BuildInfluenceTable(const Dataset& dataset,
                                   std::span<const PolicyPtr> policies,
                                   const Policy& baseline,
                                   const SafetySpec& spec, Estimator estimator,
                                   const NuisanceModel* nuisance) {
  if (estimator == Estimator::kDr && nuisance == nullptr) {
    throw ValidationError("DR influence table needs a nuisance model");
  }
  PseudoOutcomes pseudo = estimator == Estimator::kIpw
                              ? PseudoOutcomes::Ipw(dataset)
                              : PseudoOutcomes::Dr(dataset, *nuisance);
  return PolicyEvaluator(dataset, std::move(pseudo), baseline, spec)
      .Table(policies);
}

double EmpiricalVariance(std::span<const double> column) {
  if (column.size() < 2) throw ValidationError("variance needs n >= 2");
  return EmpiricalVariance(Eigen::Map<const Eigen::VectorXd>(
      column.data(), static_cast<Eigen::Index>(column.size())));
}

double EmpiricalVariance(const Eigen::Ref<const Eigen::VectorXd>& column) {
  if (column.size() < 2) throw ValidationError("variance needs n >= 2");
  const double mean = column.mean();
  return (column.array() - mean).square().mean();
}

Eigen::MatrixXd EmpiricalCovariance(const InfluenceTable& table) {
  if (table.num_rows() < 2) throw ValidationError("covariance needs n >= 2");
  const Eigen::MatrixXd centered =
      table.values.rowwise() - table.values.colwise().mean();
  const auto m = centered.cols();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(m, m);
  cov.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose());
  cov = cov.selfadjointView<Eigen::Lower>();
  return cov / static_cast<double>(table.num_rows());
}

}  // namespace snpl
