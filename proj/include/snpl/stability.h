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

// Stability budget for the noisy pruning step: the post-selection level
// correction alpha'(delta), its maximizer delta*, the sensitivity floors for
// the two guarantee modes, hyperparameter heuristics and Laplace noise.

#ifndef SNPL_STABILITY_H_
#define SNPL_STABILITY_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "snpl/core.h"
#include "snpl/rng.h"

namespace snpl {

// (alpha - delta) exp(-(n/2) eps^2 - eps sqrt(n log(2/delta) / 2)).
// Requires 0 < delta < alpha < 1, eps >= 0, n >= 1.
double AlphaPrime(double alpha, double delta, double n, double epsilon);

struct DeltaStar {
  double delta = 0.0;
  double alpha_prime = 0.0;
};

// argmax over delta in (0, alpha) of AlphaPrime: 2000-point log grid on
// [alpha 1e-6, alpha (1 - 1e-6)] refined by golden-section search.
DeltaStar OptimizeDelta(double alpha, double n, double epsilon);

struct GammaGridCell {
  double alpha = 0.0;
  double gamma = 0.0;
  double ratio = 0.0;  // alpha'(delta*) / alpha with eps = gamma / sqrt(n)
};

// The ratio does not depend on n; it is evaluated at n = 10^4.
double GammaRatio(double gamma, double alpha);
std::vector<GammaGridCell> GammaGrid(std::span<const double> alphas,
                                     std::span<const double> gammas);
// Header `alpha,gamma,ratio`, 6 significant digits.
std::string GammaGridCsv(std::span<const GammaGridCell> cells);

// t(n, xi) = (4 xi^2 + 2 xi^2 / n + 2 xi^2 (n - 1) / n) / (n (n - 1)).
double TFunction(double n, double xi);
// 2 xi / n + sqrt(2 log(3 / alpha') t(n, xi)).
double BFinite(double n, double xi, double alpha_prime);
// 4 xi / n + Phi^{-1}(1 - alpha' / (eta |S|)) sqrt(t(n, 2 xi)).
double BAsymptotic(double n, double xi, double alpha_prime, int eta,
                   std::size_t s_count);

// ceil(max(alpha' |Pi|^p / (alpha^p |S|^(1-p)), 1)).
int EtaHeuristic(double alpha, double alpha_prime, std::size_t class_size,
                 std::size_t s_count, double p);

// Laplace(0, scale) by inverse CDF of one uniform.
double LaplaceFromUniform(double scale, double u);
double SampleLaplace(double scale, Rng& rng);

struct StabilityBudget {
  double epsilon = 0.0;
  double gamma = 0.0;
  double delta_star = 0.0;
  double alpha_prime = 0.0;
  std::size_t n = 0;

  // epsilon = gamma / sqrt(n) unless `epsilon_override` is set.
  static StabilityBudget Make(double alpha, std::size_t n, double gamma,
                              std::optional<double> epsilon_override);
};

struct SensitivityConstants {
  double xi = 0.0;       // (2 + max_j w_j) / c
  double t_value = 0.0;  // t(n, xi)
  double floor = 0.0;    // B_finite or B_asymp
  double B = 0.0;        // chosen sensitivity, >= floor
  Mode mode = Mode::kFinite;

  // Throws when `override_B` is below the floor for `mode`.
  static SensitivityConstants Make(Mode mode, std::size_t n,
                                   const SafetySpec& spec,
                                   double positivity_floor,
                                   double alpha_prime, int eta,
                                   std::optional<double> override_B);
};

}  // namespace snpl

#endif  // SNPL_STABILITY_H_
