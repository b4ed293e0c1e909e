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

#include "snpl/stability.h"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "snpl/normal.h"

namespace snpl {
namespace {

constexpr int kDeltaGridPoints = 2000;
constexpr double kGammaGridN = 1e4;

}  // namespace

double AlphaPrime(double alpha, double delta, double n, double epsilon) {
  if (!(alpha > 0.0 && alpha < 1.0) || !(delta > 0.0 && delta < alpha)) {
    throw ValidationError("alpha' needs 0 < delta < alpha < 1");
  }
  if (!(epsilon >= 0.0) || !(n >= 1.0)) {
    throw ValidationError("alpha' needs epsilon >= 0 and n >= 1");
  }
  const double exponent = -0.5 * n * epsilon * epsilon -
                          epsilon * std::sqrt(n * std::log(2.0 / delta) / 2.0);
  return (alpha - delta) * std::exp(exponent);
}

DeltaStar OptimizeDelta(double alpha, double n, double epsilon) {
  const double lo = std::log(alpha * 1e-6);
  const double hi = std::log(alpha * (1.0 - 1e-6));
  std::vector<double> grid(kDeltaGridPoints);
  int best = 0;
  double best_value = -1.0;
  for (int i = 0; i < kDeltaGridPoints; ++i) {
    grid[i] = std::exp(lo + (hi - lo) * i / (kDeltaGridPoints - 1));
    const double v = AlphaPrime(alpha, grid[i], n, epsilon);
    if (v > best_value) {
      best_value = v;
      best = i;
    }
  }
  // Golden-section search on the bracketing grid cells, in log(delta).
  double a = std::log(grid[std::max(best - 1, 0)]);
  double b = std::log(grid[std::min(best + 1, kDeltaGridPoints - 1)]);
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  auto f = [&](double log_delta) {
    return AlphaPrime(alpha, std::exp(log_delta), n, epsilon);
  };
  double c = b - ratio * (b - a);
  double d = a + ratio * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < 200 && (b - a) > 1e-14; ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - ratio * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + ratio * (b - a);
      fd = f(d);
    }
  }
  const double refined = std::exp(0.5 * (a + b));
  const double refined_value = f(0.5 * (a + b));
  if (refined_value >= best_value) return DeltaStar{refined, refined_value};
  return DeltaStar{grid[best], best_value};
}

double GammaRatio(double gamma, double alpha) {
  const double epsilon = gamma / std::sqrt(kGammaGridN);
  return OptimizeDelta(alpha, kGammaGridN, epsilon).alpha_prime / alpha;
}

std::vector<GammaGridCell> GammaGrid(std::span<const double> alphas,
                                     std::span<const double> gammas) {
  std::vector<GammaGridCell> cells;
  cells.reserve(alphas.size() * gammas.size());
  for (double alpha : alphas) {
    for (double gamma : gammas) {
      cells.push_back({alpha, gamma, GammaRatio(gamma, alpha)});
    }
  }
  return cells;
}

std::string GammaGridCsv(std::span<const GammaGridCell> cells) {
  std::string out = "alpha,gamma,ratio\n";
  char line[96];
  for (const GammaGridCell& c : cells) {
    std::snprintf(line, sizeof(line), "%.6g,%.6g,%.6g\n", c.alpha, c.gamma,
                  c.ratio);
    out += line;
  }
  return out;
}

double TFunction(double n, double xi) {
  if (n < 2.0) throw ValidationError("t(n, xi) needs n >= 2");
  const double xi2 = xi * xi;
  return (4.0 * xi2 + 2.0 * xi2 / n + 2.0 * xi2 * (n - 1.0) / n) /
         (n * (n - 1.0));
}

double BFinite(double n, double xi, double alpha_prime) {
  return 2.0 * xi / n +
         std::sqrt(2.0 * std::log(3.0 / alpha_prime) * TFunction(n, xi));
}

double BAsymptotic(double n, double xi, double alpha_prime, int eta,
                   std::size_t s_count) {
  const double tail = alpha_prime / (eta * static_cast<double>(s_count));
  return 4.0 * xi / n - InverseNormalCdf(tail) * std::sqrt(TFunction(n, 2 * xi));
}

int EtaHeuristic(double alpha, double alpha_prime, std::size_t class_size,
                 std::size_t s_count, double p) {
  if (!(p < 1.0)) throw ValidationError("eta heuristic needs p < 1");
  const double raw = alpha_prime * std::pow(class_size, p) /
                     (std::pow(alpha, p) * std::pow(s_count, 1.0 - p));
  return static_cast<int>(std::ceil(std::max(raw, 1.0)));
}

double LaplaceFromUniform(double scale, double u) {
  if (!(scale > 0.0)) throw ValidationError("Laplace scale must be > 0");
  const double centered = u - 0.5;
  if (centered == 0.0) return 0.0;
  const double magnitude = -scale * std::log1p(-2.0 * std::abs(centered));
  return centered < 0.0 ? -magnitude : magnitude;
}

double SampleLaplace(double scale, Rng& rng) {
  return LaplaceFromUniform(scale, UniformOpen(rng));
}

StabilityBudget StabilityBudget::Make(double alpha, std::size_t n, double gamma,
                                      std::optional<double> epsilon_override) {
  if (n < 1) throw ValidationError("stability budget needs n >= 1");
  StabilityBudget b;
  b.n = n;
  b.gamma = gamma;
  b.epsilon = epsilon_override ? *epsilon_override
                               : gamma / std::sqrt(static_cast<double>(n));
  const DeltaStar ds = OptimizeDelta(alpha, static_cast<double>(n), b.epsilon);
  b.delta_star = ds.delta;
  b.alpha_prime = ds.alpha_prime;
  return b;
}

SensitivityConstants SensitivityConstants::Make(
    Mode mode, std::size_t n, const SafetySpec& spec, double positivity_floor,
    double alpha_prime, int eta, std::optional<double> override_B) {
  SensitivityConstants k;
  k.mode = mode;
  const double nd = static_cast<double>(n);
  k.xi = (2.0 + spec.max_weight()) / positivity_floor;
  k.t_value = TFunction(nd, k.xi);
  k.floor = mode == Mode::kFinite
                ? BFinite(nd, k.xi, alpha_prime)
                : BAsymptotic(nd, k.xi, alpha_prime, eta, spec.num_guardrails());
  if (override_B && *override_B < k.floor) {
    throw ValidationError("sensitivity B = " + std::to_string(*override_B) +
                          " is below the floor " + std::to_string(k.floor) +
                          " for " + ToString(mode) + " mode");
  }
  k.B = override_B ? *override_B : k.floor;
  return k;
}

}  // namespace snpl
