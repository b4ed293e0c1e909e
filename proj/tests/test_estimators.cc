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

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "snpl/estimators.h"
#include "snpl/synthetic.h"

namespace snpl {
namespace {

class ConstantPolicy : public Policy {
 public:
  explicit ConstantPolicy(std::vector<double> probs) : probs_(probs) {}
  std::string id() const override { return "constant"; }
  int num_actions() const override { return static_cast<int>(probs_.size()); }
  void Evaluate(std::span<const double>, std::span<double> out) const override {
    std::copy(probs_.begin(), probs_.end(), out.begin());
  }

 private:
  std::vector<double> probs_;
};

Dataset RandomDataset(std::size_t n, std::vector<double> e, std::uint64_t seed,
                      int outcomes = 2) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::discrete_distribution<int> arm(e.begin(), e.end());
  std::vector<Observation> obs;
  for (std::size_t i = 0; i < n; ++i) {
    Observation o;
    o.covariates = {u(gen), u(gen)};
    o.action = arm(gen) + 1;
    for (int j = 0; j < outcomes; ++j) o.outcomes.push_back(u(gen));
    obs.push_back(o);
  }
  const double floor = *std::min_element(e.begin(), e.end());
  return Dataset(obs, PropensityModel::Constant(e, floor));
}

TEST(IpwValue, TwoRowHandExample) {
  Dataset ds({Observation{{0.0}, 1, {1.0}}, Observation{{0.0}, 2, {1.0}}},
             PropensityModel::Uniform(2));
  EXPECT_DOUBLE_EQ(IpwValue(ds, FixedActionPolicy(2, 1), 1), 1.0);
}

TEST(IpwValue, ZeroOutcomes) {
  Dataset ds({Observation{{0.3}, 1, {0.0}}, Observation{{0.6}, 2, {0.0}}},
             PropensityModel::Uniform(2));
  EXPECT_EQ(IpwValue(ds, UniformPolicy(2), 1), 0.0);
}

TEST(IpwValue, LoggingPolicyGivesSampleMean) {
  const std::vector<double> e = {0.3, 0.7};
  const Dataset ds = RandomDataset(5000, e, 17);
  const ConstantPolicy logging(e);
  for (int j = 1; j <= 2; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < ds.size(); ++i) mean += ds.outcome0(i, j - 1);
    mean /= ds.size();
    EXPECT_NEAR(IpwValue(ds, logging, j), mean, 1e-12);
  }
}

TEST(NuisanceModel, ConstantResponseIsReproducedExactly) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Observation> obs;
  for (int i = 0; i < 200; ++i) {
    obs.push_back({{u(gen), u(gen)}, 1 + (i % 2), {0.7}});
  }
  Dataset ds(obs, PropensityModel::Uniform(2));
  Rng rng(1);
  const NuisanceModel mu = NuisanceModel::Fit(ds, 5, rng);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (int k = 1; k <= 2; ++k) EXPECT_EQ(mu.Predict(i, k, 0), 0.7);
  }
}

TEST(NuisanceModel, RecoversNoiselessLinearModel) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Observation> obs;
  for (int i = 0; i < 20000; ++i) {
    const double x1 = u(gen), x2 = u(gen);
    const int a = 1 + (i % 2);
    const double y = a == 1 ? 0.2 + 0.3 * x1 + 0.4 * x2 : 0.9 - 0.5 * x2;
    obs.push_back({{x1, x2}, a, {y}});
  }
  Dataset ds(obs, PropensityModel::Uniform(2));
  Rng rng(2);
  const NuisanceModel mu = NuisanceModel::Fit(ds, 5, rng);
  double worst = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const int a = ds.action(i);
    worst = std::max(worst, std::abs(mu.Predict(i, a, 0) - ds.outcome0(i, 0)));
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(NuisanceModel, FoldArithmetic) {
  const Dataset ds = RandomDataset(10, {0.5, 0.5}, 8);
  Rng rng(3);
  const NuisanceModel mu = NuisanceModel::Fit(ds, 5, rng);
  std::vector<int> counts(5, 0);
  for (std::size_t i = 0; i < ds.size(); ++i) ++counts[mu.fold_of(i)];
  for (int f = 0; f < 5; ++f) {
    EXPECT_EQ(counts[f], 2);
    EXPECT_EQ(mu.training_size(f), 8u);
  }
}

TEST(NuisanceModel, PredictionsComeFromOwnFoldModel) {
  const Dataset ds = RandomDataset(300, {0.5, 0.5}, 9);
  Rng rng(4);
  const NuisanceModel mu = NuisanceModel::Fit(ds, 5, rng);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (int k = 1; k <= 2; ++k) {
      EXPECT_DOUBLE_EQ(
          mu.Predict(i, k, 1),
          mu.PredictFromFold(mu.fold_of(i), k, 1, ds.covariates(i)));
      EXPECT_GE(mu.Predict(i, k, 1), 0.0);
      EXPECT_LE(mu.Predict(i, k, 1), 1.0);
    }
  }
}

TEST(NuisanceModel, SingularDesignFallsBackToRidge) {
  std::vector<Observation> obs;
  for (int i = 0; i < 40; ++i) {
    const double x = (i % 7) / 7.0;
    obs.push_back({{x, 2.0 * x}, 1 + (i % 2), {0.1 + 0.5 * x}});
  }
  Dataset ds(obs, PropensityModel::Uniform(2));
  Rng rng(6);
  const NuisanceModel mu = NuisanceModel::Fit(ds, 2, rng);
  EXPECT_FALSE(mu.warnings().empty());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    EXPECT_NEAR(mu.Predict(i, ds.action(i), 0), ds.outcome0(i, 0), 1e-6);
  }
}

TEST(NuisanceModel, EmptyArmCellThrows) {
  std::vector<Observation> obs;
  for (int i = 0; i < 10; ++i) obs.push_back({{0.1 * i}, 1, {0.5}});
  obs.push_back({{0.5}, 2, {0.5}});
  Dataset ds(obs, PropensityModel::Uniform(2));
  Rng rng(7);
  EXPECT_THROW(NuisanceModel::Fit(ds, 2, rng), Error);
}

TEST(DrValue, ZeroNuisanceEqualsIpw) {
  const Dataset ds = RandomDataset(3000, {0.4, 0.6}, 10);
  const NuisanceModel zero = NuisanceModel::Constant(ds, 0.0);
  const ThresholdPolicy pi(Feature::kG1, 0.3);
  ConstantPolicy mix({0.2, 0.8});
  for (int j = 1; j <= 2; ++j) {
    EXPECT_NEAR(DrValue(ds, pi, j, zero), IpwValue(ds, pi, j), 1e-12);
    EXPECT_NEAR(DrValue(ds, mix, j, zero), IpwValue(ds, mix, j), 1e-12);
  }
}

TEST(DrValue, ConstantOutcomeAndNuisance) {
  std::vector<Observation> obs;
  for (int i = 0; i < 37; ++i) obs.push_back({{0.01 * i}, 1 + (i % 3 == 0), {0.35}});
  Dataset ds(obs, PropensityModel::Uniform(2));
  const NuisanceModel mu = NuisanceModel::Constant(ds, 0.35);
  EXPECT_DOUBLE_EQ(DrValue(ds, FixedActionPolicy(2, 1), 1, mu), 0.35);
  EXPECT_DOUBLE_EQ(DrValue(ds, FixedActionPolicy(2, 2), 1, mu), 0.35);
}

TEST(DrValue, ConvergesToClosedFormTruth) {
  Rng data_rng(2024);
  const Dataset ds = GenerateSynthetic(100000, data_rng);
  Rng fold_rng(1);
  const NuisanceModel mu = NuisanceModel::Fit(ds, 5, fold_rng);
  const auto pi0 = SyntheticBaseline();
  const FixedActionPolicy treat_all(2, 1);
  EXPECT_NEAR(DrValue(ds, *pi0, 1, mu), 0.375, 0.01);
  EXPECT_NEAR(DrValue(ds, *pi0, 2, mu), 0.53125, 0.01);
  EXPECT_NEAR(DrValue(ds, treat_all, 1, mu), 0.25, 0.01);
  EXPECT_NEAR(DrValue(ds, treat_all, 2, mu), 0.625, 0.01);
  EXPECT_NEAR(IpwValue(ds, treat_all, 1), 0.25, 0.01);
  EXPECT_NEAR(IpwValue(ds, treat_all, 2), 0.625, 0.01);
}

TEST(InfluenceTable, SelfDifferenceIsZero) {
  const Dataset ds = RandomDataset(200, {0.5, 0.5}, 12);
  SafetySpec spec{1, {1, 2}, {0.0, 0.0}, 0.1, {}};
  const auto pi0 = SyntheticBaseline();
  const std::vector<PolicyPtr> policies = {pi0};
  const auto t = BuildInfluenceTable(ds, policies, *pi0, spec, Estimator::kIpw);
  EXPECT_EQ(t.values.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(t.estimates.cwiseAbs().maxCoeff(), 0.0);
}

TEST(InfluenceTable, ColumnMeanMatchesSeparateValueCalls) {
  const Dataset ds = RandomDataset(500, {0.5, 0.5}, 13);
  const SafetySpec spec{1, {2}, {-0.1}, 0.1, {}};
  const auto pi0 = SyntheticBaseline();
  const std::vector<PolicyPtr> policies = {
      std::make_shared<ThresholdPolicy>(Feature::kG2, 0.6)};
  const auto t = BuildInfluenceTable(ds, policies, *pi0, spec, Estimator::kIpw);
  const double expected =
      IpwValue(ds, *policies[0], 2) - 0.9 * IpwValue(ds, *pi0, 2);
  EXPECT_NEAR(t.estimates(0), expected, 1e-12);
  EXPECT_NEAR(t.values.col(0).mean(), expected, 1e-12);

  Rng rng(5);
  const NuisanceModel mu = NuisanceModel::Fit(ds, 5, rng);
  const auto td =
      BuildInfluenceTable(ds, policies, *pi0, spec, Estimator::kDr, &mu);
  EXPECT_NEAR(td.estimates(0),
              DrValue(ds, *policies[0], 2, mu) - 0.9 * DrValue(ds, *pi0, 2, mu),
              1e-12);
}

TEST(InfluenceTable, IndexMap) {
  const Dataset ds = RandomDataset(100, {0.5, 0.5}, 14);
  const SafetySpec spec = SyntheticSpec();
  const auto pi0 = SyntheticBaseline();
  const std::vector<PolicyPtr> policies = {
      std::make_shared<ThresholdPolicy>(Feature::kG1, 0.2),
      std::make_shared<ThresholdPolicy>(Feature::kG2, 0.7)};
  const auto t = BuildInfluenceTable(ds, policies, *pi0, spec, Estimator::kIpw);
  ASSERT_EQ(t.values.cols(), 4);
  // 1-based column 1*2+2 = 4 is (policy 2, guardrail 2).
  EXPECT_EQ(t.column(1, 1), 3u);
  EXPECT_NEAR(t.estimates(3),
              IpwValue(ds, *policies[1], 2) - 0.9 * IpwValue(ds, *pi0, 2),
              1e-12);
  for (Eigen::Index c = 0; c < 4; ++c) {
    EXPECT_NEAR(t.values.col(c).mean(), t.estimates(c), 1e-9);
  }
}

TEST(InfluenceTable, WeightLengthMismatchThrows) {
  const Dataset ds = RandomDataset(20, {0.5, 0.5}, 15);
  SafetySpec spec = SyntheticSpec();
  spec.weights = {0.0};
  const auto pi0 = SyntheticBaseline();
  const std::vector<PolicyPtr> policies = {pi0};
  EXPECT_THROW(
      BuildInfluenceTable(ds, policies, *pi0, spec, Estimator::kIpw),
      ValidationError);
}

TEST(EmpiricalVariance, HandExamples) {
  EXPECT_EQ(EmpiricalVariance(std::vector<double>{3.0, 3.0, 3.0}), 0.0);
  EXPECT_DOUBLE_EQ(EmpiricalVariance(std::vector<double>{0.0, 2.0}), 1.0);
  EXPECT_DOUBLE_EQ(
      EmpiricalVariance(std::vector<double>{1.5, -1.5, 1.5, -1.5}), 2.25);
  EXPECT_THROW(EmpiricalVariance(std::vector<double>{1.0}), Error);
}

InfluenceTable TableOf(const Eigen::MatrixXd& m) {
  InfluenceTable t;
  t.values = m;
  t.estimates = m.colwise().mean().transpose();
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    t.policy_ids.push_back("p" + std::to_string(c));
  }
  t.num_guardrails = 1;
  return t;
}

TEST(EmpiricalCovariance, DuplicatedColumnsAreRankDeficient) {
  Eigen::MatrixXd m(5, 2);
  m.col(0) << 0.1, 0.4, -0.3, 0.9, 0.2;
  m.col(1) = m.col(0);
  const Eigen::MatrixXd cov = EmpiricalCovariance(TableOf(m));
  EXPECT_DOUBLE_EQ(cov(0, 0), cov(1, 1));
  EXPECT_DOUBLE_EQ(cov(0, 0), cov(0, 1));
  EXPECT_NEAR(cov.determinant(), 0.0, 1e-12);
}

TEST(EmpiricalCovariance, DiagonalAndSymmetry) {
  std::mt19937_64 gen(21);
  std::normal_distribution<double> z;
  Eigen::MatrixXd m(400, 6);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double common = z(gen);
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(i, c) = common + z(gen) * c;
  }
  const Eigen::MatrixXd cov = EmpiricalCovariance(TableOf(m));
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    EXPECT_NEAR(cov(c, c), EmpiricalVariance(Eigen::VectorXd(m.col(c))), 1e-12);
    for (Eigen::Index d = 0; d < m.cols(); ++d) {
      EXPECT_NEAR(cov(c, d), cov(d, c), 1e-12);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-9);
}

TEST(EmpiricalCovariance, IndependentColumnsNearlyUncorrelated) {
  std::mt19937_64 gen(22);
  std::normal_distribution<double> z;
  Eigen::MatrixXd m(100000, 2);
  for (Eigen::Index i = 0; i < m.rows(); ++i) m.row(i) << z(gen), z(gen);
  const Eigen::MatrixXd cov = EmpiricalCovariance(TableOf(m));
  EXPECT_LT(std::abs(cov(0, 1)), 0.02);
}

}  // namespace
}  // namespace snpl
