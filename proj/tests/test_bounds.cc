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

#include "snpl/bounds.h"
#include "snpl/normal.h"

namespace snpl {
namespace {

double Phi(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Lower quantile of min of k independent standard normals:
// 1 - (1 - Phi(z))^k = level, solved by bisection.
double MinOfIndependentQuantile(int k, double level) {
  double lo = -10.0, hi = 10.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (1.0 - std::pow(1.0 - Phi(mid), k) < level ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

InfluenceTable Table(const Eigen::MatrixXd& values, std::size_t s_count) {
  InfluenceTable t;
  t.values = values;
  t.estimates = values.colwise().mean().transpose();
  t.num_guardrails = s_count;
  for (Eigen::Index p = 0; p < values.cols() / static_cast<Eigen::Index>(s_count);
       ++p) {
    t.policy_ids.push_back("p" + std::to_string(p));
  }
  return t;
}

Eigen::MatrixXd Alternating(int n, double a, double shift = 0.0) {
  Eigen::MatrixXd m(n, 1);
  for (int i = 0; i < n; ++i) m(i, 0) = shift + (i % 2 ? -a : a);
  return m;
}

SafetySpec OneGuardrail(double w = 0.0) { return {1, {1}, {w}, 0.1, {}}; }

TEST(FiniteBounds, HandWidth) {
  const auto t = Table(Alternating(100, 1.0), 1);
  const auto b = FiniteBounds(t, OneGuardrail(), 0.1, 1, 0.5);
  const double log_term = std::log(15.0);
  const double expected = std::sqrt(2.0 * log_term / 100) + 12.0 * log_term / 100;
  EXPECT_NEAR(expected, 0.55770, 1e-5);
  EXPECT_NEAR(b.at(0, 0).width, expected, 1e-12);
  EXPECT_NEAR(b.at(0, 0).bound, -expected, 1e-12);
  EXPECT_EQ(b.method, BoundMethod::kFinite);
  EXPECT_NEAR(b.critical_value, log_term, 1e-12);
}

TEST(FiniteBounds, WidthVanishesWithZeroVarianceAndLargeN) {
  double prev = 1e9;
  for (int n : {100, 10000, 1000000}) {
    const auto t = Table(Eigen::MatrixXd::Constant(n, 1, 0.3), 1);
    const auto b = FiniteBounds(t, OneGuardrail(), 0.1, 1, 0.5);
    EXPECT_LT(b.at(0, 0).width, prev);
    prev = b.at(0, 0).width;
  }
  EXPECT_LT(prev, 1e-4);
}

TEST(FiniteBounds, DoublingClassSizeWidens) {
  const auto t = Table(Alternating(100, 1.0), 1);
  EXPECT_GT(FiniteBounds(t, OneGuardrail(), 0.1, 20, 0.5).at(0, 0).width,
            FiniteBounds(t, OneGuardrail(), 0.1, 10, 0.5).at(0, 0).width);
}

TEST(FiniteBounds, UpperSenseAddsWidth) {
  SafetySpec spec = OneGuardrail();
  spec.senses = {BoundSense::kUpper};
  const auto t = Table(Alternating(100, 1.0, 0.2), 1);
  const auto b = FiniteBounds(t, spec, 0.1, 1, 0.5);
  EXPECT_NEAR(b.at(0, 0).bound, 0.2 + b.at(0, 0).width, 1e-12);
  EXPECT_NEAR(b.at(0, 0).margin(), -b.at(0, 0).bound, 0.0);
}

TEST(FiniteBounds, RangeUsesWeight) {
  // R = (2 + w) / c; with sigma = 0 the width is 3 R L / n.
  const auto t = Table(Eigen::MatrixXd::Constant(100, 1, 0.0), 1);
  const auto b = FiniteBounds(t, OneGuardrail(-0.5), 0.1, 1, 0.5);
  EXPECT_NEAR(b.at(0, 0).width, 3.0 * 3.0 * std::log(15.0) / 100, 1e-12);
}

TEST(FiniteBounds, OverflowingLogThrows) {
  const auto t = Table(Alternating(10, 1.0), 1);
  EXPECT_THROW(FiniteBounds(t, OneGuardrail(), 1e-320, 1, 0.5), Error);
}

TEST(SupTQuantile, OneDimensional) {
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(1, 1);
  EXPECT_NEAR(ComputeSupTQuantile(id, 0.05, 100000, 1).z_star, -1.645, 0.05);
  EXPECT_NEAR(ComputeSupTQuantile(id, 0.5, 100000, 2).z_star, 0.0, 0.02);
}

TEST(SupTQuantile, TwoIndependentMatchesOracle) {
  const double oracle = MinOfIndependentQuantile(2, 0.05);
  EXPECT_NEAR(oracle, -1.955, 0.001);
  const auto q = ComputeSupTQuantile(Eigen::MatrixXd::Identity(2, 2), 0.05,
                                     100000, 3);
  EXPECT_NEAR(q.z_star, oracle, 0.05);
}

TEST(SupTQuantile, ScaleFree) {
  Eigen::MatrixXd cov(2, 2);
  cov << 4.0, 0.0, 0.0, 0.01;
  const auto q = ComputeSupTQuantile(cov, 0.05, 100000, 3);
  EXPECT_NEAR(q.z_star, MinOfIndependentQuantile(2, 0.05), 0.05);
}

TEST(SupTQuantile, DeterministicGivenSeed) {
  Eigen::MatrixXd cov(3, 3);
  cov << 1, 0.5, 0.2, 0.5, 1, 0.1, 0.2, 0.1, 2;
  EXPECT_EQ(ComputeSupTQuantile(cov, 0.1, 5000, 9).z_star,
            ComputeSupTQuantile(cov, 0.1, 5000, 9).z_star);
}

TEST(SupTQuantile, NonPositiveBelowHalf) {
  Eigen::MatrixXd cov = Eigen::MatrixXd::Constant(4, 4, 0.3);
  cov.diagonal().setOnes();
  EXPECT_LE(ComputeSupTQuantile(cov, 0.3, 10000, 4).z_star, 0.0);
}

TEST(SupTQuantile, CorrelationNarrowsQuantile) {
  const Eigen::MatrixXd dup = Eigen::MatrixXd::Ones(2, 2);
  const Eigen::MatrixXd ind = Eigen::MatrixXd::Identity(2, 2);
  const double z_dup = ComputeSupTQuantile(dup, 0.05, 100000, 5).z_star;
  const double z_ind = ComputeSupTQuantile(ind, 0.05, 100000, 5).z_star;
  EXPECT_LE(std::abs(z_dup), std::abs(z_ind));
  EXPECT_NEAR(z_dup, -1.645, 0.05);
}

TEST(SupTQuantile, DegenerateCovarianceThrows) {
  EXPECT_THROW(ComputeSupTQuantile(Eigen::MatrixXd::Zero(2, 2), 0.05, 1000, 1),
               Error);
}

TEST(AsymptoticBounds, SingleCoordinateWidth) {
  const auto t = Table(Alternating(100, 1.0), 1);
  SafetySpec spec = OneGuardrail();
  const auto b = AsymptoticBounds(t, spec, 0.05, 100000, 7);
  EXPECT_NEAR(b.at(0, 0).width, 0.1645, 0.005);
  EXPECT_NEAR(b.at(0, 0).bound, b.at(0, 0).estimate - b.at(0, 0).width, 1e-15);
}

TEST(AsymptoticBounds, ZeroVarianceColumnIsTight) {
  Eigen::MatrixXd m(100, 2);
  m.col(0) = Alternating(100, 1.0);
  m.col(1).setConstant(0.25);
  const auto b = AsymptoticBounds(Table(m, 2), {1, {1, 2}, {0, 0}, 0.1, {}},
                                  0.1, 20000, 1);
  EXPECT_EQ(b.at(0, 1).bound, 0.25);
  EXPECT_EQ(b.at(0, 1).width, 0.0);
  const auto all_zero = AsymptoticBounds(
      Table(Eigen::MatrixXd::Constant(50, 1, 0.1), 1), OneGuardrail(), 0.1,
      1000, 1);
  EXPECT_EQ(all_zero.at(0, 0).bound, 0.1);
}

TEST(AsymptoticBounds, UpperSenseMirrorsLower) {
  std::mt19937_64 gen(8);
  std::normal_distribution<double> z;
  Eigen::MatrixXd m(500, 2);
  for (int i = 0; i < 500; ++i) m.row(i) << z(gen), 0.5 * z(gen) + 0.3;
  SafetySpec lower{1, {1, 2}, {0, 0}, 0.1, {}};
  SafetySpec upper = lower;
  upper.senses = {BoundSense::kUpper, BoundSense::kUpper};
  const auto bl = AsymptoticBounds(Table(m, 2), lower, 0.1, 50000, 3);
  const auto bu = AsymptoticBounds(Table(m, 2), upper, 0.1, 50000, 3);
  for (std::size_t s = 0; s < 2; ++s) {
    EXPECT_NEAR(bu.at(0, s).bound - bu.at(0, s).estimate,
                bl.at(0, s).estimate - bl.at(0, s).bound, 1e-12);
  }
}

TEST(Bounds, MonotoneInLevel) {
  std::mt19937_64 gen(9);
  std::normal_distribution<double> z;
  Eigen::MatrixXd m(400, 4);
  for (int i = 0; i < 400; ++i) {
    const double c = z(gen);
    m.row(i) << c + z(gen), c - z(gen), z(gen), 0.3 * c + z(gen);
  }
  const auto t = Table(m, 2);
  const SafetySpec spec = {1, {1, 2}, {0, -0.1}, 0.1, {}};
  for (std::size_t col = 0; col < 4; ++col) {
    double prev_f = -1e9, prev_a = -1e9;
    for (double level : {0.01, 0.05, 0.1, 0.2}) {
      const auto f = FiniteBounds(t, spec, level, 2, 0.5);
      const auto a = AsymptoticBounds(t, spec, level, 50000, 11);
      EXPECT_GE(f.entries[col].bound, prev_f);
      EXPECT_GE(a.entries[col].bound, prev_a);
      prev_f = f.entries[col].bound;
      prev_a = a.entries[col].bound;
    }
  }
}

TEST(Bounds, SupTNeverWiderThanBonferroniNormal) {
  std::mt19937_64 gen(10);
  std::normal_distribution<double> z;
  for (double rho : {0.0, 0.5, 0.95}) {
    Eigen::MatrixXd m(1000, 6);
    for (int i = 0; i < 1000; ++i) {
      const double c = z(gen);
      for (int k = 0; k < 6; ++k) {
        m(i, k) = std::sqrt(rho) * c + std::sqrt(1 - rho) * z(gen);
      }
    }
    const auto t = Table(m, 2);
    const SafetySpec spec = {1, {1, 2}, {0, 0}, 0.1, {}};
    const auto sup = AsymptoticBounds(t, spec, 0.1, 100000, 12);
    const auto bon = NormalQuantileBounds(t, spec, 0.1 / 6, 6);
    EXPECT_NEAR(bon.critical_value, InverseNormalCdf(1 - 0.1 / 6), 1e-12);
    for (std::size_t k = 0; k < 6; ++k) {
      EXPECT_LE(sup.entries[k].width, bon.entries[k].width * 1.01);
    }
  }
}

TEST(NormalQuantileBounds, SingleTestIsUncorrected) {
  const auto t = Table(Alternating(100, 1.0), 1);
  const auto b = NormalQuantileBounds(t, OneGuardrail(), 0.1, 1);
  EXPECT_NEAR(b.at(0, 0).width, InverseNormalCdf(0.9) / 10.0, 1e-12);
}

TEST(LowerBoundTable, MarginsAndCertification) {
  Eigen::MatrixXd m(4, 2);
  m << 1, 2, 1, 2, 1, 2, 1, 2;
  const auto b = FiniteBounds(Table(m, 2), {1, {1, 2}, {0, 0}, 0.1, {}}, 0.1,
                              1, 0.5);
  EXPECT_DOUBLE_EQ(b.MinMargin(0), std::min(b.at(0, 0).bound, b.at(0, 1).bound));
}

}  // namespace
}  // namespace snpl
