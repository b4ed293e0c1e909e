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

#include "snpl/bounds.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "snpl/normal.h"
#include "snpl/rng.h"

namespace snpl {
namespace {

// Variances at or below this are treated as exactly zero.
constexpr double kZeroVariance = 1e-20;

LowerBoundTable EmptyTable(const InfluenceTable& table, double level,
                           BoundMethod method) {
  if (!(level > 0.0 && level < 1.0)) {
    throw ValidationError("bound level must lie in (0, 1)");
  }
  if (table.num_rows() < 2) throw ValidationError("bounds need n >= 2");
  LowerBoundTable out;
  out.num_policies = table.num_policies();
  out.num_guardrails = table.num_guardrails;
  out.level = level;
  out.method = method;
  out.entries.reserve(out.num_policies * out.num_guardrails);
  return out;
}

void Push(LowerBoundTable& out, const InfluenceTable& table,
          const SafetySpec& spec, std::size_t p, std::size_t s, double width) {
  BoundEntry e;
  e.policy_id = table.policy_ids[p];
  e.guardrail = spec.guardrails[s];
  e.sense = spec.sense(s);
  e.estimate = table.estimates(static_cast<Eigen::Index>(table.column(p, s)));
  e.width = width;
  e.bound = e.sense == BoundSense::kLower ? e.estimate - width
                                          : e.estimate + width;
  out.entries.push_back(std::move(e));
}

double Sign(BoundSense sense) { return sense == BoundSense::kLower ? 1 : -1; }

}  // namespace

std::string ToString(BoundMethod method) {
  switch (method) {
    case BoundMethod::kFinite:
      return "finite";
    case BoundMethod::kAsymptotic:
      return "asymptotic";
    case BoundMethod::kNormalQuantile:
      return "normal-quantile";
  }
  return "unknown";
}

double LowerBoundTable::MinMargin(std::size_t policy) const {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < num_guardrails; ++s) {
    m = std::min(m, at(policy, s).margin());
  }
  return m;
}

LowerBoundTable FiniteBounds(const InfluenceTable& table, const SafetySpec& spec,
                             double level, std::size_t assumed_class_size,
                             double positivity_floor) {
  LowerBoundTable out = EmptyTable(table, level, BoundMethod::kFinite);
  if (assumed_class_size < 1) throw ValidationError("class size must be >= 1");
  const double n = static_cast<double>(table.num_rows());
  const double union_size =
      static_cast<double>(assumed_class_size) * table.num_guardrails;
  const double log_term = std::log(3.0 * union_size / (2.0 * level));
  if (!std::isfinite(log_term)) {
    throw ValidationError("level " + std::to_string(level) +
                          " too small: log term overflows");
  }
  out.correction_size = static_cast<std::size_t>(union_size);
  out.critical_value = log_term;
  for (std::size_t p = 0; p < table.num_policies(); ++p) {
    for (std::size_t s = 0; s < table.num_guardrails; ++s) {
      const double sigma = std::sqrt(EmpiricalVariance(
          table.values.col(static_cast<Eigen::Index>(table.column(p, s)))));
      const double range = (2.0 + spec.weights[s]) / positivity_floor;
      const double width = sigma * std::sqrt(2.0 * log_term / n) +
                           3.0 * range * log_term / n;
      Push(out, table, spec, p, s, width);
    }
  }
  return out;
}

SupTQuantile ComputeSupTQuantile(const Eigen::MatrixXd& cov, double level,
                                 int n_sim, std::uint64_t seed) {
  if (!(level > 0.0 && level < 1.0)) {
    throw ValidationError("sup-t level must lie in (0, 1)");
  }
  if (n_sim < 100) throw ValidationError("sup-t needs n_sim >= 100");
  std::vector<Eigen::Index> active;
  for (Eigen::Index j = 0; j < cov.rows(); ++j) {
    if (cov(j, j) > kZeroVariance) active.push_back(j);
  }
  if (active.empty()) throw Error("degenerate covariance");

  const auto m = static_cast<Eigen::Index>(active.size());
  Eigen::MatrixXd corr(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = 0; b < m; ++b) {
      corr(a, b) = cov(active[a], active[b]) /
                   std::sqrt(cov(active[a], active[a]) *
                             cov(active[b], active[b]));
    }
  }
  // Symmetric factor V diag(sqrt(max(lambda, 0))); rank-deficient inputs are
  // expected when policies overlap.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(corr);
  const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd factor = eig.eigenvectors() * root.asDiagonal();

  Rng rng(seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd z(m);
  std::vector<double> minima(static_cast<std::size_t>(n_sim));
  for (int r = 0; r < n_sim; ++r) {
    for (Eigen::Index a = 0; a < m; ++a) z(a) = normal(rng);
    minima[r] = (factor * z).minCoeff();
  }
  const auto rank = static_cast<std::size_t>(
      std::max(1.0, std::ceil(level * static_cast<double>(n_sim))));
  std::nth_element(minima.begin(), minima.begin() + (rank - 1), minima.end());
  return SupTQuantile{minima[rank - 1], n_sim, seed};
}

LowerBoundTable AsymptoticBounds(const InfluenceTable& table,
                                 const SafetySpec& spec, double level,
                                 int n_sim, std::uint64_t seed) {
  LowerBoundTable out = EmptyTable(table, level, BoundMethod::kAsymptotic);
  const double n = static_cast<double>(table.num_rows());
  Eigen::MatrixXd cov = EmpiricalCovariance(table);
  const auto dim = cov.rows();
  out.correction_size = static_cast<std::size_t>(dim);

  bool any_variance = false;
  for (Eigen::Index j = 0; j < dim; ++j) {
    any_variance = any_variance || cov(j, j) > kZeroVariance;
  }
  double z_star = 0.0;
  if (any_variance) {
    // Flip upper-sense coordinates so one lower quantile covers both senses.
    Eigen::VectorXd sign(dim);
    for (std::size_t p = 0; p < table.num_policies(); ++p) {
      for (std::size_t s = 0; s < table.num_guardrails; ++s) {
        sign(static_cast<Eigen::Index>(table.column(p, s))) =
            Sign(spec.sense(s));
      }
    }
    cov = sign.asDiagonal() * cov * sign.asDiagonal();
    z_star = ComputeSupTQuantile(cov, level, n_sim, seed).z_star;
  }
  out.critical_value = z_star;
  for (std::size_t p = 0; p < table.num_policies(); ++p) {
    for (std::size_t s = 0; s < table.num_guardrails; ++s) {
      const auto c = static_cast<Eigen::Index>(table.column(p, s));
      const double var = cov(c, c) > kZeroVariance ? cov(c, c) : 0.0;
      Push(out, table, spec, p, s, -z_star * std::sqrt(var / n));
    }
  }
  return out;
}

LowerBoundTable NormalQuantileBounds(const InfluenceTable& table,
                                     const SafetySpec& spec,
                                     double per_test_level,
                                     std::size_t correction_size) {
  LowerBoundTable out =
      EmptyTable(table, per_test_level, BoundMethod::kNormalQuantile);
  const double n = static_cast<double>(table.num_rows());
  const double q = -InverseNormalCdf(per_test_level);
  out.correction_size = correction_size;
  out.critical_value = q;
  for (std::size_t p = 0; p < table.num_policies(); ++p) {
    for (std::size_t s = 0; s < table.num_guardrails; ++s) {
      const double var = EmpiricalVariance(
          table.values.col(static_cast<Eigen::Index>(table.column(p, s))));
      Push(out, table, spec, p, s, q * std::sqrt(var / n));
    }
  }
  return out;
}

}  // namespace snpl
