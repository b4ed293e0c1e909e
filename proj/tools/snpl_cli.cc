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

// Command line front end.
//
//   snpl_cli simulate --config bench.json --out dir/
//   snpl_cli run --data data.csv --config run.json --out trace.json
//   snpl_cli gamma-grid --out grid.csv [--alpha-steps 50 --gamma-steps 80]
//   snpl_cli bounds-scatter --data data.csv --config run.json --out pts.csv
//   snpl_cli export --n 1000 --seed 7 --grid-size 100 --out dir/
//
// Exit codes: 0 success (run: a non-baseline policy), 3 run fell back to the
// baseline, 2 invalid input, 1 anything else.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "snpl/benchmark.h"
#include "snpl/config.h"
#include "snpl/csv_io.h"
#include "snpl/rng.h"
#include "snpl/stability.h"
#include "snpl/synthetic.h"

namespace {

constexpr int kExitBaseline = 3;
constexpr int kExitInvalid = 2;

void WriteFile(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw snpl::Error("cannot write " + path.string());
  out << text;
}

std::vector<double> Linspace(double lo, double hi, int steps) {
  std::vector<double> v;
  for (int i = 0; i < steps; ++i) {
    v.push_back(steps == 1 ? lo : lo + (hi - lo) * i / (steps - 1));
  }
  return v;
}

struct Loaded {
  snpl::RunConfig config;
  snpl::Dataset data;
  std::vector<snpl::PolicyPtr> policies;
  snpl::PolicyPtr baseline;
  snpl::MethodOptions options;
};

Loaded Load(const std::string& data_path, const std::string& config_path) {
  snpl::RunConfig cfg = snpl::ParseRunConfig(snpl::ReadJsonFile(config_path));
  snpl::Dataset data = snpl::LoadDatasetCsv(
      data_path, {cfg.num_actions, cfg.propensity, cfg.positivity_floor});
  snpl::ValidateDataset(data);
  cfg.spec.Validate(data.outcome_dim());
  auto policies = cfg.policy_class.Build();
  snpl::PolicyPtr baseline = std::make_shared<snpl::ThresholdPolicy>(
      cfg.baseline.feature, cfg.baseline.cutoff);
  for (const auto& p : policies) {
    if (p->required_dim() > data.covariate_dim()) {
      throw snpl::ValidationError("dimension mismatch: policy " + p->id() +
                                  " needs " +
                                  std::to_string(p->required_dim()) +
                                  " covariates");
    }
  }
  snpl::MethodOptions opts{cfg.spec, cfg.hyper, cfg.mode, cfg.in_loop,
                           cfg.scan_order};
  return Loaded{std::move(cfg), std::move(data), std::move(policies),
                std::move(baseline), std::move(opts)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Safe noisy policy learning"};
  app.require_subcommand(1);

  std::string config_path, data_path, out_path;
  int threads = snpl::WorkerCount();
  auto* simulate = app.add_subcommand("simulate", "replicated benchmark");
  simulate->add_option("--config", config_path)->required();
  simulate->add_option("--out", out_path, "output directory")->required();
  simulate->add_option("--threads", threads);

  auto* run = app.add_subcommand("run", "learn a policy from a CSV");
  run->add_option("--data", data_path)->required();
  run->add_option("--config", config_path)->required();
  run->add_option("--out", out_path, "trace JSON")->required();

  int alpha_steps = 50;
  int gamma_steps = 80;
  auto* grid = app.add_subcommand("gamma-grid", "alpha'/alpha over a grid");
  grid->add_option("--out", out_path)->required();
  grid->add_option("--alpha-steps", alpha_steps)->check(CLI::PositiveNumber);
  grid->add_option("--gamma-steps", gamma_steps)->check(CLI::PositiveNumber);

  auto* scatter = app.add_subcommand("bounds-scatter", "bound coordinates");
  scatter->add_option("--data", data_path)->required();
  scatter->add_option("--config", config_path)->required();
  scatter->add_option("--out", out_path)->required();

  std::size_t n = 1000;
  std::uint64_t seed = 0;
  int grid_size = 100;
  auto* exp = app.add_subcommand("export", "synthetic data and truth table");
  exp->add_option("--n", n);
  exp->add_option("--seed", seed);
  exp->add_option("--grid-size", grid_size);
  exp->add_option("--out", out_path, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) {
      const auto cfg =
          snpl::ParseBenchmarkConfig(snpl::ReadJsonFile(config_path));
      const auto report = snpl::RunBenchmark(cfg, threads);
      const std::filesystem::path dir(out_path);
      WriteFile(dir / "report.csv", snpl::ReportCsv(report));
      WriteFile(dir / "decisions.csv", snpl::DecisionsCsv(report));
      WriteFile(dir / "report.json",
                snpl::ReportJson(report, cfg).dump(2) + "\n");
      std::cout << snpl::ReportCsv(report);
      return 0;
    }
    if (*run) {
      const Loaded l = Load(data_path, config_path);
      const auto result = snpl::RunMethod(l.config.method, l.data, l.policies,
                                          l.baseline, l.options);
      nlohmann::json doc = result.trace;
      doc["config"] = snpl::ToJson(l.config);
      WriteFile(out_path, doc.dump(2) + "\n");
      std::cout << result.decision.policy_id << "\n";
      return result.decision.is_baseline ? kExitBaseline : 0;
    }
    if (*grid) {
      const auto alphas = Linspace(0.01, 0.5, alpha_steps);
      const auto gammas = Linspace(0.01, 0.8, gamma_steps);
      WriteFile(out_path,
                snpl::GammaGridCsv(snpl::GammaGrid(alphas, gammas)));
      return 0;
    }
    if (*scatter) {
      const Loaded l = Load(data_path, config_path);
      WriteFile(out_path,
                snpl::BoundsScatterCsv(l.config.method, l.data, l.policies,
                                       l.baseline, l.options));
      return 0;
    }
    if (*exp) {
      snpl::Rng rng(seed);
      const snpl::Dataset data = snpl::GenerateSynthetic(n, rng);
      const auto policies = snpl::BuildThresholdClass(grid_size);
      const auto truth = snpl::BuildTruthTable(
          policies, *snpl::SyntheticBaseline(), snpl::SyntheticSpec());
      const std::filesystem::path dir(out_path);
      WriteFile(dir / "data.csv", snpl::DatasetCsv(data));
      WriteFile(dir / "truth.csv", snpl::TruthTableCsv(truth));
      return 0;
    }
  } catch (const snpl::ValidationError& e) {
    std::cerr << "error: " << e.what();
    if (e.row()) std::cerr << " (data row " << *e.row() << ")";
    std::cerr << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
