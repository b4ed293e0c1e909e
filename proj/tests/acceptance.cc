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

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero when any criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "snpl/benchmark.h"
#include "snpl/bounds.h"
#include "snpl/config.h"
#include "snpl/estimators.h"
#include "snpl/normal.h"
#include "snpl/snpl.h"
#include "snpl/stability.h"
#include "snpl/synthetic.h"
#include "snpl/trace.h"

namespace {

using namespace snpl;

struct Check {
  bool ok = true;
  std::vector<std::string> notes;

  void Expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      notes.push_back("FAILED " + what);
    }
  }
  void Near(double got, double want, double tol, const std::string& what) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%s = %.5f (target %.5f +- %.4g)",
                  what.c_str(), got, want, tol);
    Expect(std::abs(got - want) <= tol, buf);
    notes.push_back(buf);
  }
};

int failures = 0;

void Report(int id, const std::string& title, const Check& c) {
  std::printf("criterion %d %s: %s\n", id, c.ok ? "PASS" : "FAIL",
              title.c_str());
  for (const auto& n : c.notes) std::printf("    %s\n", n.c_str());
  std::fflush(stdout);
  if (!c.ok) ++failures;
}

struct Reference {
  const char* method;
  double detection;
  double ei;
};

void CheckTable(Check& c, int grid_size,
                const std::vector<Reference>& reference) {
  BenchmarkConfig cfg = ParseBenchmarkConfig(nlohmann::json::object());
  cfg.n = 1000;
  cfg.replications = 300;
  cfg.grid_size = grid_size;
  cfg.master_seed = 20261019;
  const BenchmarkReport r = RunBenchmark(cfg);
  const std::string size = "|Pi|=" + std::to_string(r.class_size);
  for (const Reference& ref : reference) {
    const auto it = std::find_if(
        r.methods.begin(), r.methods.end(),
        [&](const MethodSummary& s) { return s.method == ref.method; });
    if (it == r.methods.end()) {
      c.Expect(false, std::string("missing method ") + ref.method);
      continue;
    }
    const std::string tag = size + " " + ref.method;
    c.Near(it->detection, ref.detection, 0.10, tag + " detection");
    c.Near(it->ei, ref.ei, 0.015, tag + " EI");
    const double t1 = it->type1.value_or(0.0);
    c.Expect(t1 <= cfg.spec.alpha, tag + " type I <= alpha");
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%s type I = %.4f (%d unsafe of %d)",
                  tag.c_str(), t1, it->violations, it->detections);
    c.notes.push_back(buf);
  }
}

void Criterion1() {
  Check c;
  CheckTable(c, 500,
             {{"ds-25", 0.513, 0.051}, {"ds-50", 0.396, 0.040},
              {"ds-75", 0.206, 0.018}, {"bonferroni", 0.543, 0.036},
              {"snpl", 0.200, 0.024}});
  Report(1, "benchmark table at |Pi| = 2500", c);
}

void Criterion2() {
  Check c;
  CheckTable(c, 200,
             {{"ds-25", 0.513, 0.049}, {"ds-50", 0.380, 0.037},
              {"ds-75", 0.223, 0.021}, {"bonferroni", 0.540, 0.043},
              {"snpl", 0.226, 0.026}});
  CheckTable(c, 100,
             {{"ds-25", 0.466, 0.046}, {"ds-50", 0.400, 0.038},
              {"ds-75", 0.206, 0.017}, {"bonferroni", 0.626, 0.050},
              {"snpl", 0.186, 0.021}});
  Report(2, "benchmark table at |Pi| = 1000 and 500", c);
}

double OracleAlphaPrime(double a, double d, double n, double eps) {
  return (a - d) * std::exp(-0.5 * n * eps * eps -
                            eps * std::sqrt(n * std::log(2.0 / d) / 2.0));
}

double OracleT(double n, double xi) {
  return (4 * xi * xi + 2 * xi * xi / n + 2 * xi * xi * (n - 1) / n) /
         (n * (n - 1));
}

void Criterion3() {
  Check c;
  const double ap = AlphaPrime(0.1, 0.05, 100, 0.01);
  c.Near(ap, 0.04343, 1e-4, "alpha'(0.1, 0.05, 100, 0.01)");
  c.Near(ap, OracleAlphaPrime(0.1, 0.05, 100, 0.01), 1e-12,
         "alpha' vs oracle");
  c.Expect(TFunction(2, 1) == 3.0, "t(2, 1) == 3 exactly");
  c.notes.push_back("t(2, 1) = " + std::to_string(TFunction(2, 1)));
  const double bf = BFinite(1000, 4, 0.0434);
  c.Near(bf, 0.03653, 1e-4, "B_finite(1000, 4, 0.0434)");
  const double bf_oracle =
      8.0 / 1000 + std::sqrt(2 * std::log(3 / 0.0434) * OracleT(1000, 4));
  c.Near(bf, bf_oracle, 1e-12, "B_finite vs oracle");
  Report(3, "stability formulas", c);
}

double OracleRatio(double gamma, double alpha) {
  const double n = 1e4;
  const double eps = gamma / std::sqrt(n);
  double best = 0.0;
  const int steps = 200000;
  const double lo = std::log(alpha * 1e-9);
  const double hi = std::log(alpha * (1 - 1e-9));
  for (int i = 0; i <= steps; ++i) {
    const double d = std::exp(lo + (hi - lo) * i / steps);
    best = std::max(best, OracleAlphaPrime(alpha, d, n, eps));
  }
  return best / alpha;
}

void Criterion4() {
  Check c;
  std::vector<double> alphas, gammas;
  for (int i = 0; i < 50; ++i) alphas.push_back(0.01 + 0.49 * i / 49);
  for (int i = 0; i < 80; ++i) gammas.push_back(0.01 + 0.79 * i / 79);
  const auto cells = GammaGrid(alphas, gammas);
  double min_small = 1.0;
  bool monotone = true;
  for (std::size_t a = 0; a < alphas.size(); ++a) {
    min_small = std::min(min_small, cells[a * gammas.size()].ratio);
    for (std::size_t g = 1; g < gammas.size(); ++g) {
      monotone = monotone && cells[a * gammas.size() + g].ratio <=
                                 cells[a * gammas.size() + g - 1].ratio;
    }
  }
  c.Expect(cells[0].gamma == 0.01 && cells[1].gamma > 0.01,
           "grid is alpha-major with gamma inner");
  c.Expect(min_small >= 0.97, "f(0.01, alpha) >= 0.97 for all alpha");
  c.notes.push_back("min over alpha of f(0.01, alpha) = " +
                    std::to_string(min_small));
  c.Expect(monotone, "f nonincreasing in gamma at every alpha");
  const double o1 = OracleRatio(0.1, 0.1);
  const double o3 = OracleRatio(0.3, 0.1);
  c.Near(o1, 0.811, 0.02, "oracle f(0.1, 0.1)");
  c.Near(o3, 0.54, 0.02, "oracle f(0.3, 0.1)");
  c.Near(GammaRatio(0.1, 0.1), o1, 1e-6, "f(0.1, 0.1) vs oracle");
  c.Near(GammaRatio(0.3, 0.1), o3, 1e-6, "f(0.3, 0.1) vs oracle");
  double spread = 0.0;
  for (double gamma : {0.05, 0.1, 0.3}) {
    const double ref = OptimizeDelta(0.1, 1e2, gamma / 10.0).alpha_prime;
    for (double n : {1e4, 1e6}) {
      for (double d : {0.001, 0.01, 0.05}) {
        spread = std::max(
            spread, std::abs(AlphaPrime(0.1, d, n, gamma / std::sqrt(n)) -
                             AlphaPrime(0.1, d, 1e2, gamma / 10.0)));
      }
      spread = std::max(
          spread,
          std::abs(OptimizeDelta(0.1, n, gamma / std::sqrt(n)).alpha_prime -
                   ref));
    }
  }
  c.Expect(spread <= 1e-12, "alpha' invariant in n to 1e-12");
  char buf[64];
  std::snprintf(buf, sizeof(buf), "max n-spread = %.3g", spread);
  c.notes.push_back(buf);
  Report(4, "gamma grid", c);
}

struct Coverage {
  int finite_miss = 0;
  int asym_miss = 0;
  int wider = 0;
  double worst_excess = -1e9;
};

void Criterion5() {
  Check c;
  std::vector<PolicyPtr> policies;
  for (Feature f : {Feature::kG1, Feature::kG2, Feature::kG3, Feature::kG4,
                    Feature::kG5}) {
    for (double cut : {0.2, 0.4, 0.6, 0.8}) {
      policies.push_back(std::make_shared<ThresholdPolicy>(f, cut));
    }
  }
  const auto baseline = SyntheticBaseline();
  const SafetySpec spec = SyntheticSpec();
  const TrueValue base = TrueValues(*baseline);
  std::vector<double> truth;
  for (const auto& p : policies) {
    const TrueValue v = TrueValues(dynamic_cast<const ThresholdPolicy&>(*p));
    for (std::size_t s = 0; s < spec.num_guardrails(); ++s) {
      const int j = spec.guardrails[s];
      truth.push_back(v[j] - (1 + spec.weights[s]) * base[j]);
    }
  }
  auto misses = [&](const LowerBoundTable& b) {
    for (std::size_t k = 0; k < truth.size(); ++k) {
      if (b.entries[k].bound > truth[k]) return true;
    }
    return false;
  };
  const int reps = 500;
  Coverage cov;
  for (int r = 0; r < reps; ++r) {
    const std::uint64_t seed = DeriveSeed(555, r);
    Rng rng_f(DeriveSeed(seed, "finite-data"));
    const Dataset small = GenerateSynthetic(1000, rng_f);
    const InfluenceTable tf =
        BuildInfluenceTable(small, policies, *baseline, spec, Estimator::kIpw);
    cov.finite_miss += misses(FiniteBounds(tf, spec, spec.alpha,
                                           policies.size(),
                                           small.positivity_floor()));

    Rng rng_a(DeriveSeed(seed, "asym-data"));
    const Dataset big = GenerateSynthetic(4000, rng_a);
    Rng rng_mu(DeriveSeed(seed, "nuisance"));
    const NuisanceModel mu = NuisanceModel::Fit(big, 5, rng_mu);
    const InfluenceTable ta = BuildInfluenceTable(big, policies, *baseline,
                                                  spec, Estimator::kDr, &mu);
    const LowerBoundTable sup =
        AsymptoticBounds(ta, spec, spec.alpha, 20000, DeriveSeed(seed, "supt"));
    cov.asym_miss += misses(sup);
    const LowerBoundTable bon = NormalQuantileBounds(
        ta, spec, spec.alpha / truth.size(), truth.size());
    const double excess = -sup.critical_value - bon.critical_value;
    cov.worst_excess = std::max(cov.worst_excess, excess);
    cov.wider += excess > 0.01;
  }
  const double f_rate = static_cast<double>(cov.finite_miss) / reps;
  const double a_rate = static_cast<double>(cov.asym_miss) / reps;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "finite miscoverage at n=1000 = %.4f (<= %.2f)", f_rate,
                spec.alpha);
  c.Expect(f_rate <= spec.alpha, buf);
  c.notes.push_back(buf);
  std::snprintf(buf, sizeof(buf),
                "sup-t miscoverage at n=4000 = %.4f (<= %.2f)", a_rate,
                spec.alpha + 0.03);
  c.Expect(a_rate <= spec.alpha + 0.03, buf);
  c.notes.push_back(buf);
  std::snprintf(buf, sizeof(buf),
                "max(|z*| - z_bonferroni) = %.4f over %d reps (<= 0.01)",
                cov.worst_excess, reps);
  c.Expect(cov.wider == 0, buf);
  c.notes.push_back(buf);
  Report(5, "joint bound coverage", c);
}

void Criterion6() {
  Check c;
  Rng rng(606);
  const Dataset ds = GenerateSynthetic(100000, rng);
  const auto pi0 = SyntheticBaseline();
  const FixedActionPolicy treat(2, 1);
  const UniformPolicy logging(2);
  const NuisanceModel zero = NuisanceModel::Constant(ds, 0.0);
  double worst_zero = 0.0, worst_mean = 0.0;
  for (int j = 1; j <= 2; ++j) {
    for (const Policy* p : std::vector<const Policy*>{pi0.get(), &treat}) {
      worst_zero = std::max(
          worst_zero, std::abs(DrValue(ds, *p, j, zero) - IpwValue(ds, *p, j)));
    }
    double mean = 0.0;
    for (std::size_t i = 0; i < ds.size(); ++i) mean += ds.outcome0(i, j - 1);
    mean /= ds.size();
    worst_mean =
        std::max(worst_mean, std::abs(IpwValue(ds, logging, j) - mean));
  }
  c.Expect(worst_zero <= 1e-12, "DR with zero outcome model == IPW");
  c.Expect(worst_mean <= 1e-12, "IPW of logging policy == sample mean");
  char buf[96];
  std::snprintf(buf, sizeof(buf), "max |DR0 - IPW| = %.3g, max |IPW - mean| = %.3g",
                worst_zero, worst_mean);
  c.notes.push_back(buf);
  Rng rng_mu(607);
  const NuisanceModel mu = NuisanceModel::Fit(ds, 5, rng_mu);
  c.Near(DrValue(ds, *pi0, 1, mu), 0.375, 0.01, "DR V1(pi0)");
  c.Near(DrValue(ds, *pi0, 2, mu), 0.53125, 0.01, "DR V2(pi0)");
  c.Near(DrValue(ds, treat, 1, mu), 0.25, 0.01, "DR V1(always treat)");
  c.Near(DrValue(ds, treat, 2, mu), 0.625, 0.01, "DR V2(always treat)");
  Report(6, "estimator identities", c);
}

int RunCli(const std::string& args) {
  const std::string cmd =
      std::string(SNPL_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void Criterion7() {
  Check c;
  Rng lap(707);
  const double b = 0.7;
  double m1 = 0, m2 = 0;
  const int draws = 1000000;
  for (int i = 0; i < draws; ++i) {
    const double v = SampleLaplace(b, lap);
    m1 += v;
    m2 += v * v;
  }
  const double var = m2 / draws - (m1 / draws) * (m1 / draws);
  c.Near(var / (2 * b * b), 1.0, 0.05, "Laplace variance / 2b^2");

  const auto cls = BuildThresholdClass(500);
  bool bounded = true, identical = true;
  int max_pruned = 0;
  for (int r = 0; r < 40; ++r) {
    Rng rng(DeriveSeed(708, r));
    const Dataset ds = GenerateSynthetic(1000, rng);
    SnplConfig cfg;
    cfg.spec = SyntheticSpec();
    cfg.baseline = SyntheticBaseline();
    cfg.hyper.seed = DeriveSeed(709, r);
    cfg.mode = r % 2 ? Mode::kFinite : Mode::kAsymptotic;
    const SnplTrace t = RunSnpl(ds, cls, cfg);
    bounded = bounded && static_cast<int>(t.pruned.size()) <= t.eta;
    max_pruned = std::max<int>(max_pruned, t.pruned.size());
    if (r < 4) {
      identical = identical &&
                  ToJson(t).dump() == ToJson(RunSnpl(ds, cls, cfg)).dump();
    }
  }
  c.Expect(bounded, "|pruned| <= eta on 40 traces");
  c.notes.push_back("largest pruned set = " + std::to_string(max_pruned));
  c.Expect(identical, "identical seeds give byte-identical traces");

  Rng rng(710);
  const Dataset ds = GenerateSynthetic(1000, rng);
  SnplConfig cfg;
  cfg.spec = SyntheticSpec();
  cfg.baseline = SyntheticBaseline();
  bool rejected = true;
  for (Mode mode : {Mode::kFinite, Mode::kAsymptotic}) {
    cfg.mode = mode;
    cfg.hyper.B.reset();
    const double floor = RunSnpl(ds, cls, cfg).sensitivity.floor;
    cfg.hyper.B = 0.99 * floor;
    try {
      RunSnpl(ds, cls, cfg);
      rejected = false;
    } catch (const ValidationError&) {
    }
  }
  c.Expect(rejected, "B below the floor rejected by the library");

  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "snpl_acceptance_b";
  fs::remove_all(dir);
  const bool exported =
      RunCli("export --n 1000 --seed 1 --out " + dir.string()) == 0;
  std::ofstream(dir / "cfg.json") << R"({"hyper": {"B": 1e-6}})";
  const int code = RunCli("run --data " + (dir / "data.csv").string() +
                          " --config " + (dir / "cfg.json").string() +
                          " --out " + (dir / "t.json").string());
  c.Expect(exported && code == 2, "CLI run exits 2 for B below the floor");
  c.notes.push_back("CLI exit code = " + std::to_string(code));
  fs::remove_all(dir);
  Report(7, "sparse vector mechanics", c);
}

void Criterion8() {
  Check c;
  const double ap =
      StabilityBudget::Make(0.1, 1000, 0.1, std::nullopt).alpha_prime;
  const int eta = EtaHeuristic(0.1, ap, 2949, 2, 0.5);
  c.Expect(eta == 10, "eta(alpha=0.1, gamma=0.1, |Pi|=2949, |S|=2, p=0.5) == 10");
  c.notes.push_back("eta = " + std::to_string(eta) +
                    ", alpha' = " + std::to_string(ap));
  const double oracle = std::ceil(std::max(
      ap * std::pow(2949.0, 0.5) / (std::pow(0.1, 0.5) * std::pow(2.0, 0.5)),
      1.0));
  c.Expect(eta == static_cast<int>(oracle), "matches direct evaluation");
  Report(8, "eta heuristic", c);
}

}  // namespace

int main() {
  Criterion3();
  Criterion4();
  Criterion6();
  Criterion7();
  Criterion8();
  Criterion5();
  Criterion1();
  Criterion2();
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
