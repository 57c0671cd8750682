#pragma once

// Parameter sweeps over tasks per source (r), channel count (N) or source
// count (M). Sweep spec file (JSON):
//   {
//     "base_config": "fig4_base.json",
//     "sweep": {"tasks_per_source": [1, 2, 3, 4, 5]},  // or channels / sources
//     "scale_budgets": false,
//     "policies": ["mgf", "maf", "random"],
//     "random_seeds": [1, 2, 3],
//     "output_dir": "out/fig4"
//   }
// Without scale_budgets, a tasks_per_source sweep replicates tasks r times
// and keeps C_m and N; with it, the instance is the r-multiplied system.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "mtri/bounds.hpp"
#include "mtri/io.hpp"
#include "mtri/sim.hpp"

namespace mtri {

enum class SweepVariable { kTasksPerSource, kChannels, kSources };

inline std::string sweep_variable_name(SweepVariable v) {
  switch (v) {
    case SweepVariable::kTasksPerSource: return "tasks_per_source";
    case SweepVariable::kChannels: return "channels";
    default: return "sources";
  }
}

struct ExperimentSpec {
  std::filesystem::path base_config_path;
  SweepVariable variable = SweepVariable::kTasksPerSource;
  std::vector<std::int64_t> values;
  bool scale_budgets = false;
  std::vector<std::string> policies;
  std::vector<std::uint64_t> random_seeds;
  std::filesystem::path output_dir;
};

inline std::vector<std::string> validate_spec(const ExperimentSpec& spec) {
  std::vector<std::string> out;
  if (spec.values.empty()) out.push_back("sweep: list of sweep values must be nonempty");
  for (auto v : spec.values)
    if (v < (spec.variable == SweepVariable::kChannels ? 0 : 1))
      out.push_back("sweep: value " + std::to_string(v) + " out of range");
  if (spec.policies.empty()) out.push_back("policies: at least one policy is required");
  bool has_random = false;
  for (const auto& p : spec.policies) {
    if (p == "random") has_random = true;
    else if (p != "mgf" && p != "maf") out.push_back("policies: unknown policy `" + p + "`");
  }
  if (has_random && spec.random_seeds.empty())
    out.push_back("random_seeds: must be nonempty when the random policy is selected");
  return out;
}

inline ExperimentSpec load_experiment_spec(const std::filesystem::path& path) {
  const auto j = parse_json_file(path);
  ExperimentSpec spec;
  try {
    std::filesystem::path base = j.at("base_config").get<std::string>();
    spec.base_config_path = base.is_relative() ? path.parent_path() / base : base;
    const auto& sweep = j.at("sweep");
    if (sweep.size() != 1) throw ConfigError(path.string() + ": sweep must name exactly one variable");
    const auto& [key, list] = *sweep.items().begin();
    if (key == "tasks_per_source") spec.variable = SweepVariable::kTasksPerSource;
    else if (key == "channels") spec.variable = SweepVariable::kChannels;
    else if (key == "sources") spec.variable = SweepVariable::kSources;
    else throw ConfigError(path.string() + ": unknown sweep variable `" + key + "`");
    spec.values = list.get<std::vector<std::int64_t>>();
    spec.scale_budgets = j.value("scale_budgets", false);
    spec.policies = j.value("policies", std::vector<std::string>{"mgf", "maf", "random"});
    spec.random_seeds = j.value("random_seeds", std::vector<std::uint64_t>{});
    if (j.contains("output_dir")) {
      std::filesystem::path out = j.at("output_dir").get<std::string>();
      spec.output_dir = out.is_relative() ? path.parent_path() / out : out;
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  auto violations = validate_spec(spec);
  if (!violations.empty()) throw ConfigError(path.string() + ": invalid sweep spec", std::move(violations));
  return spec;
}

// Instance at one sweep point, plus the scale r for the asymptotic bound.
struct SweepPoint {
  SystemConfig config;
  SystemConfig bound_base;
  std::int64_t bound_r = 1;
};

inline SweepPoint sweep_point(const SystemConfig& base, SweepVariable variable, std::int64_t value,
                              bool scale_budgets) {
  SweepPoint p;
  switch (variable) {
    case SweepVariable::kTasksPerSource:
      p.config = scale_instance(base, value);
      if (!scale_budgets) {
        p.config.num_channels = base.num_channels;
        for (std::size_t m = 0; m < base.sources.size(); ++m)
          p.config.sources[m].compute_budget = base.sources[m].compute_budget;
        p.bound_base = p.config;
      } else {
        p.bound_base = base;
        p.bound_r = value;
      }
      break;
    case SweepVariable::kChannels:
      p.config = base;
      p.config.num_channels = value;
      p.bound_base = p.config;
      break;
    case SweepVariable::kSources:
      p.config = base;
      p.config.num_sources = value;
      p.config.sources.clear();
      for (std::int64_t m = 0; m < value; ++m)
        p.config.sources.push_back(base.sources[static_cast<std::size_t>(m) % base.sources.size()]);
      p.bound_base = p.config;
      break;
  }
  return p;
}

inline std::size_t worker_count() {
  if (const char* env = std::getenv("MTRI_WORKERS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n > 0) return static_cast<std::size_t>(n);
  }
  const auto hw = std::thread::hardware_concurrency();
  return hw ? hw : 1;
}

// Runs jobs on a small pool. Each job writes only its own result slot.
inline void run_parallel(const std::vector<std::function<void()>>& jobs, std::size_t workers) {
  workers = std::max<std::size_t>(1, std::min(workers, jobs.size()));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        jobs[i]();
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
}

struct SweepRow {
  std::int64_t sweep_value = 0;
  std::string policy;
  std::uint64_t seed = 0;
  double discounted_cost = 0.0;
  double gap = 0.0;
  double theorem1_rhs = 0.0;
};

inline std::vector<SweepRow> run_sweep(const SystemConfig& base, const MgfPolicy& mgf,
                                       const ExperimentSpec& spec, std::size_t workers = worker_count()) {
  struct PointState {
    SweepPoint point;
    double dual_bound = 0.0;
    double rhs = 0.0;
  };
  std::vector<PointState> points;
  std::vector<SweepRow> rows;
  std::vector<std::size_t> row_point;
  for (auto v : spec.values) {
    PointState ps{sweep_point(base, spec.variable, v, spec.scale_budgets)};
    ps.rhs = theorem1_rhs(ps.point.bound_base, ps.point.bound_r).rhs;
    points.push_back(std::move(ps));
    for (const auto& p : spec.policies) {
      if (p == "random") {
        for (auto s : spec.random_seeds) {
          rows.push_back({v, p, s});
          row_point.push_back(points.size() - 1);
        }
      } else {
        rows.push_back({v, p, 0});
        row_point.push_back(points.size() - 1);
      }
    }
  }

  std::vector<std::function<void()>> jobs;
  for (auto& ps : points)
    jobs.emplace_back([&ps, &mgf] { ps.dual_bound = dual_lower_bound(ps.point.config, mgf.dual); });
  for (std::size_t i = 0; i < rows.size(); ++i) {
    jobs.emplace_back([&, i] {
      auto& row = rows[i];
      const auto& cfg = points[row_point[i]].point.config;
      PolicyKind policy = MafPolicy{};
      if (row.policy == "mgf") policy = mgf;
      else if (row.policy == "random") policy = RandomPolicy{row.seed};
      row.discounted_cost = run(cfg, policy, row.seed).discounted_cost;
    });
  }
  run_parallel(jobs, workers);

  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& ps = points[row_point[i]];
    rows[i].gap = rows[i].discounted_cost - ps.dual_bound;
    rows[i].theorem1_rhs = ps.rhs;
  }
  return rows;
}

inline CsvWriter sweep_csv(SweepVariable variable, const std::vector<SweepRow>& rows) {
  CsvWriter csv({"sweep_var", "sweep_value", "policy", "seed", "discounted_cost", "gap", "theorem1_rhs"});
  for (const auto& r : rows)
    csv.add_row({sweep_variable_name(variable), std::to_string(r.sweep_value), r.policy,
                 std::to_string(r.seed), format_double(r.discounted_cost), format_double(r.gap),
                 format_double(r.theorem1_rhs)});
  return csv;
}

}  // namespace mtri
