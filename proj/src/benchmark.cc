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

#include "snpl/benchmark.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <variant>

#include "snpl/baselines.h"
#include "snpl/rng.h"
#include "snpl/synthetic.h"
#include "snpl/trace.h"

namespace snpl {
namespace {

using nlohmann::json;
using AnyTrace = std::variant<SnplTrace, HcpiTrace, BonferroniTrace>;

AnyTrace Dispatch(const MethodTag& tag, const Dataset& dataset,
                  std::span<const PolicyPtr> policies,
                  const PolicyPtr& baseline, const MethodOptions& o) {
  if (tag.is_snpl()) {
    SnplConfig cfg{o.spec, o.hyper, o.mode, o.in_loop, baseline,
                   o.scan_order};
    return RunSnpl(dataset, policies, cfg);
  }
  if (tag.is_bonferroni()) {
    return RunBonferroni(dataset, policies, baseline, o.spec, o.mode, o.hyper);
  }
  return RunHcpi(dataset, policies, baseline, o.spec, tag.rho, o.mode,
                 o.hyper);
}

const Decision& DecisionOf(const AnyTrace& t) {
  return std::visit([](const auto& x) -> const Decision& { return x.decision; },
                    t);
}

std::string Num(double v) {
  if (!std::isfinite(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

struct ScatterRow {
  std::string id;
  std::string class_index;
  std::vector<double> est;
  std::vector<double> bound;
  bool scanned = false;
  bool pruned = false;
  bool selected = false;
};

// D / V0 + w: the relative change V(pi) / V(pi0) - 1 shifted by the weight.
std::vector<double> Relative(std::span<const double> d,
                             std::span<const double> v0,
                             const SafetySpec& spec) {
  std::vector<double> out;
  for (std::size_t s = 0; s < d.size(); ++s) {
    out.push_back(v0[s] != 0.0 ? d[s] / v0[s] + spec.weights[s]
                               : std::nan(""));
  }
  return out;
}

std::vector<double> TableColumn(const LowerBoundTable& t, std::size_t p,
                                bool estimates) {
  std::vector<double> out;
  for (std::size_t s = 0; s < t.num_guardrails; ++s) {
    out.push_back(estimates ? t.at(p, s).estimate : t.at(p, s).bound);
  }
  return out;
}

}  // namespace

MethodRun RunMethod(const MethodTag& tag, const Dataset& dataset,
                    std::span<const PolicyPtr> policies,
                    const PolicyPtr& baseline, const MethodOptions& options) {
  const AnyTrace t = Dispatch(tag, dataset, policies, baseline, options);
  MethodRun run;
  run.decision = DecisionOf(t);
  run.trace = std::visit([](const auto& x) { return ToJson(x); }, t);
  return run;
}

std::string BoundsScatterCsv(const MethodTag& tag, const Dataset& dataset,
                             std::span<const PolicyPtr> policies,
                             const PolicyPtr& baseline,
                             const MethodOptions& options) {
  const AnyTrace any = Dispatch(tag, dataset, policies, baseline, options);
  const Decision& decision = DecisionOf(any);
  const SafetySpec& spec = options.spec;
  const std::size_t s_count = spec.num_guardrails();
  const std::string baseline_id = baseline->id();

  std::vector<ScatterRow> rows(policies.size());
  for (std::size_t i = 0; i < policies.size(); ++i) {
    rows[i].id = policies[i]->id();
    rows[i].class_index = std::to_string(i);
  }
  std::size_t pruned_size = 0;

  if (const auto* t = std::get_if<SnplTrace>(&any)) {
    pruned_size = t->pruned.size();
    for (const ScanRecord& r : t->scans) {
      ScatterRow& row = rows[r.class_index];
      row.scanned = true;
      row.est = Relative(r.estimates, t->baseline_values, spec);
      row.bound = Relative(r.in_loop_bounds, t->baseline_values, spec);
    }
    for (std::size_t p = 0; p < t->pruned.size(); ++p) {
      ScatterRow& row = rows[t->pruned[p]];
      row.pruned = true;
      row.bound = Relative(TableColumn(t->final_bounds, p, false),
                           t->baseline_values, spec);
    }
  } else if (const auto* h = std::get_if<HcpiTrace>(&any)) {
    pruned_size = h->candidate ? 1 : 0;
    for (const PolicyScore& s : h->learning_scores) {
      ScatterRow& row = rows[s.class_index];
      row.scanned = true;
      row.est = Relative(s.estimates, h->baseline_values, spec);
      row.bound = Relative(s.bounds, h->baseline_values, spec);
    }
    if (h->candidate) {
      ScatterRow& row = rows[h->learning_scores[*h->candidate].class_index];
      row.pruned = true;
      row.est = Relative(TableColumn(h->test_bounds, 0, true),
                         h->test_baseline_values, spec);
      row.bound = Relative(TableColumn(h->test_bounds, 0, false),
                           h->test_baseline_values, spec);
    }
  } else {
    const auto& b = std::get<BonferroniTrace>(any);
    for (const PolicyScore& s : b.scores) {
      ScatterRow& row = rows[s.class_index];
      row.scanned = true;
      row.pruned = s.certified;
      pruned_size += s.certified ? 1 : 0;
      row.est = Relative(s.estimates, b.baseline_values, spec);
      row.bound = Relative(s.bounds, b.baseline_values, spec);
    }
  }
  if (decision.class_index) rows[*decision.class_index].selected = true;

  ScatterRow base;
  base.id = baseline_id;
  base.est.assign(s_count, 0.0);
  base.bound.assign(s_count, 0.0);
  base.selected = decision.is_baseline;

  std::string out = "policy_id,class_index";
  for (int j : spec.guardrails) out += ",est_y" + std::to_string(j);
  for (int j : spec.guardrails) out += ",bound_y" + std::to_string(j);
  for (int j : spec.guardrails) out += ",w_y" + std::to_string(j);
  out += ",scanned,pruned,selected,pruned_size\n";
  auto emit = [&](const ScatterRow& r) {
    out += r.id + "," + r.class_index;
    for (std::size_t s = 0; s < s_count; ++s) {
      out += "," + (r.est.empty() ? std::string() : Num(r.est[s]));
    }
    for (std::size_t s = 0; s < s_count; ++s) {
      out += "," + (r.bound.empty() ? std::string() : Num(r.bound[s]));
    }
    for (double w : spec.weights) out += "," + Num(w);
    out += std::string(",") + (r.scanned ? "1" : "0") + "," +
           (r.pruned ? "1" : "0") + "," + (r.selected ? "1" : "0") + "," +
           std::to_string(pruned_size) + "\n";
  };
  emit(base);
  for (const ScatterRow& r : rows) {
    if (r.id != baseline_id) emit(r);
  }
  return out;
}

int WorkerCount() {
  if (const char* env = std::getenv("SNPL_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

MethodSummary Summarize(const std::string& method,
                        std::span<const ReplicationRecord> records,
                        double baseline_goal_value) {
  MethodSummary s;
  s.method = method;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (const ReplicationRecord& r : records) {
    if (r.method != method) continue;
    ++s.reps;
    if (!r.is_baseline) {
      ++s.detections;
      if (!r.safe) ++s.violations;
    }
    sum += r.gain;
    sum_sq += r.gain * r.gain;
  }
  if (s.reps == 0) return s;
  const double m = s.reps;
  s.detection = s.detections / m;
  s.detection_se = std::sqrt(s.detection * (1.0 - s.detection) / m);
  if (s.detections > 0) {
    const double p = static_cast<double>(s.violations) / s.detections;
    s.type1 = p;
    s.type1_se = std::sqrt(p * (1.0 - p) / s.detections);
  }
  s.ei = sum / m;
  if (s.reps > 1) {
    const double var = std::max(0.0, (sum_sq - m * s.ei * s.ei) / (m - 1.0));
    s.ei_se = std::sqrt(var / m);
  }
  if (baseline_goal_value != 0.0) {
    s.relative_ei = s.ei / baseline_goal_value;
    s.relative_ei_se = s.ei_se / std::abs(baseline_goal_value);
  }
  return s;
}

BenchmarkReport RunBenchmark(const BenchmarkConfig& config, int threads) {
  config.Validate();
  const auto start = std::chrono::steady_clock::now();
  const std::shared_ptr<const ThresholdPolicy> base_policy =
      SyntheticBaseline();
  const PolicyPtr baseline = base_policy;
  const std::vector<PolicyPtr> policies =
      BuildThresholdClass(config.grid_size, config.class_order);
  const std::vector<TruthRow> truth =
      BuildTruthTable(policies, *base_policy, config.spec);
  const TrueValue base_truth = TrueValues(*base_policy);
  const int goal = config.spec.goal;

  const std::size_t n_methods = config.methods.size();
  const int reps = config.replications;
  std::vector<ReplicationRecord> records(reps * n_methods);
  std::vector<double> method_seconds(n_methods, 0.0);
  std::mutex mu;
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;

  auto worker = [&]() {
    std::vector<double> local(n_methods, 0.0);
    for (;;) {
      const int r = next.fetch_add(1);
      if (r >= reps || failed.load()) break;
      const std::uint64_t seed_r =
          DeriveSeed(config.master_seed, static_cast<std::uint64_t>(r));
      std::size_t m = 0;
      try {
        Rng data_rng(DeriveSeed(seed_r, "data"));
        const Dataset data = GenerateSynthetic(config.n, data_rng);
        for (m = 0; m < n_methods; ++m) {
          const MethodTag& tag = config.methods[m];
          MethodOptions opts{config.spec, config.hyper, config.mode,
                             config.in_loop, config.scan_order};
          opts.hyper.seed = DeriveSeed(seed_r, tag.name);
          const auto t0 = std::chrono::steady_clock::now();
          const AnyTrace t = Dispatch(tag, data, policies, baseline, opts);
          local[m] += std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
          const Decision& d = DecisionOf(t);
          ReplicationRecord& rec = records[r * n_methods + m];
          rec.replication = r;
          rec.seed = seed_r;
          rec.method = tag.name;
          rec.policy_id = d.policy_id;
          rec.is_baseline = d.is_baseline;
          if (!d.is_baseline) {
            const TruthRow& row = truth[*d.class_index];
            rec.safe = row.safe;
            rec.gain = row.value[goal] - base_truth[goal];
          }
        }
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(mu);
        if (!failed.exchange(true)) {
          const std::string what =
              m < n_methods ? config.methods[m].name : std::string("data");
          error = std::make_exception_ptr(Error(
              "replication " + std::to_string(r) + " (seed " +
              std::to_string(seed_r) + ") failed in " + what + ": " +
              e.what()));
        }
        break;
      }
    }
    std::lock_guard<std::mutex> lock(mu);
    for (std::size_t m = 0; m < n_methods; ++m) method_seconds[m] += local[m];
  };

  const int n_threads = std::max(1, std::min(threads, reps));
  std::vector<std::thread> pool;
  for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);

  BenchmarkReport report;
  report.records = std::move(records);
  report.baseline_goal_value = base_truth[goal];
  report.class_size = policies.size();
  for (std::size_t m = 0; m < n_methods; ++m) {
    MethodSummary s = Summarize(config.methods[m].name, report.records,
                                report.baseline_goal_value);
    s.wall_seconds = method_seconds[m];
    report.methods.push_back(std::move(s));
  }
  report.wall_seconds = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - start)
                            .count();
  return report;
}

std::string ReportCsv(const BenchmarkReport& report) {
  std::string out = "method,detection,detection_se,type1,type1_se,ei,ei_se,reps\n";
  for (const MethodSummary& s : report.methods) {
    out += s.method + "," + Num(s.detection) + "," + Num(s.detection_se) + "," +
           (s.type1 ? Num(*s.type1) : "null") + "," +
           (s.type1_se ? Num(*s.type1_se) : "null") + "," + Num(s.ei) + "," +
           Num(s.ei_se) + "," + std::to_string(s.reps) + "\n";
  }
  return out;
}

std::string DecisionsCsv(const BenchmarkReport& report) {
  std::string out = "replication,seed,method,policy_id,is_baseline,safe,gain\n";
  for (const ReplicationRecord& r : report.records) {
    out += std::to_string(r.replication) + "," + std::to_string(r.seed) + "," +
           r.method + "," + r.policy_id + "," + (r.is_baseline ? "1" : "0") +
           "," + (r.safe ? "1" : "0") + "," + Num(r.gain) + "\n";
  }
  return out;
}

json ReportJson(const BenchmarkReport& report, const BenchmarkConfig& config) {
  json methods = json::array();
  for (const MethodSummary& s : report.methods) {
    json m = {{"method", s.method},
              {"reps", s.reps},
              {"detections", s.detections},
              {"violations", s.violations},
              {"detection", s.detection},
              {"detection_se", s.detection_se},
              {"ei", s.ei},
              {"ei_se", s.ei_se},
              {"relative_ei", s.relative_ei},
              {"relative_ei_se", s.relative_ei_se},
              {"wall_seconds", s.wall_seconds}};
    m["type1"] = s.type1 ? json(*s.type1) : json(nullptr);
    m["type1_se"] = s.type1_se ? json(*s.type1_se) : json(nullptr);
    methods.push_back(std::move(m));
  }
  return {{"schema_version", kSchemaVersion},
          {"config", ToJson(config)},
          {"class_size", report.class_size},
          {"baseline_goal_value", report.baseline_goal_value},
          {"methods", methods},
          {"wall_seconds", report.wall_seconds}};
}

}  // namespace snpl
