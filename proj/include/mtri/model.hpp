#pragma once

// Problem-instance data model for multi-task remote inference scheduling.
//
// An instance has M sources. Source m owns k_m inference tasks and can run at
// most C_m feature generators per slot. All sources share N channels; task
// (m, j) needs n_{m,j} of them to transmit. Each task carries an
// inference-error curve p_{m,j}(AoI) and a weight w_{m,j}.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace mtri {

using Aoi = std::int64_t;

struct LinearPenalty {
  double slope = 1.0;
  bool operator==(const LinearPenalty&) const = default;
};

struct ExponentialPenalty {
  double rate = 0.5;
  bool operator==(const ExponentialPenalty&) const = default;
};

// scale * ln(aoi). Base-10 curves are expressed by rescaling.
struct LogarithmicPenalty {
  double scale = 10.0;
  bool operator==(const LogarithmicPenalty&) const = default;
};

// values[i] is the error at AoI i+1; AoI beyond the table clamps to the last
// entry.
struct TabulatedPenalty {
  std::vector<double> values;
  bool operator==(const TabulatedPenalty&) const = default;
};

using PenaltyFunction = std::variant<LinearPenalty, ExponentialPenalty,
                                     LogarithmicPenalty, TabulatedPenalty>;

inline double penalty_eval(const PenaltyFunction& penalty, Aoi aoi) {
  const auto delta = static_cast<double>(aoi);
  return std::visit(
      [&](const auto& p) -> double {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, LinearPenalty>) {
          return p.slope * delta;
        } else if constexpr (std::is_same_v<P, ExponentialPenalty>) {
          return std::exp(p.rate * delta);
        } else if constexpr (std::is_same_v<P, LogarithmicPenalty>) {
          return p.scale * std::log(delta);
        } else {
          if (p.values.empty()) return 0.0;
          const auto idx = std::min<Aoi>(aoi, static_cast<Aoi>(p.values.size()));
          return p.values[static_cast<std::size_t>(idx - 1)];
        }
      },
      penalty);
}

inline std::string penalty_name(const PenaltyFunction& penalty) {
  switch (penalty.index()) {
    case 0: return "linear";
    case 1: return "exponential";
    case 2: return "logarithmic";
    default: return "tabulated";
  }
}

struct TaskConfig {
  std::int64_t channel_width = 1;
  double weight = 1.0;
  PenaltyFunction penalty = LinearPenalty{};
  // Overrides SystemConfig::initial_aoi for this task.
  std::optional<Aoi> initial_aoi;
};

struct SourceConfig {
  std::int64_t compute_budget = 1;
  std::vector<TaskConfig> tasks;
};

struct TaskId {
  std::size_t source = 0;
  std::size_t task = 0;
  auto operator<=>(const TaskId&) const = default;
};

struct SystemConfig {
  std::int64_t num_sources = 0;
  std::int64_t num_channels = 0;
  double discount = 0.9;
  std::int64_t horizon = 100;
  std::int64_t aoi_cap = 200;
  Aoi initial_aoi = 1;
  std::vector<SourceConfig> sources;

  // K, the total task count.
  std::size_t num_tasks() const {
    std::size_t k = 0;
    for (const auto& s : sources) k += s.tasks.size();
    return k;
  }

  // Flat (m, j)-lexicographic task order used by every per-task vector.
  std::vector<TaskId> task_ids() const {
    std::vector<TaskId> ids;
    ids.reserve(num_tasks());
    for (std::size_t m = 0; m < sources.size(); ++m)
      for (std::size_t j = 0; j < sources[m].tasks.size(); ++j) ids.push_back({m, j});
    return ids;
  }

  const TaskConfig& task(TaskId id) const {
    if (id.source >= sources.size() || id.task >= sources[id.source].tasks.size())
      throw std::out_of_range("task id (" + std::to_string(id.source) + ", " +
                              std::to_string(id.task) + ") outside the instance");
    return sources[id.source].tasks[id.task];
  }
};

// Per-task AoI in flat task order. Values are never clamped here.
struct AoIState {
  std::vector<Aoi> aoi;
  bool operator==(const AoIState&) const = default;
};

inline AoIState initial_state(const SystemConfig& config) {
  AoIState state;
  state.aoi.reserve(config.num_tasks());
  for (const auto& s : config.sources)
    for (const auto& t : s.tasks) state.aoi.push_back(t.initial_aoi.value_or(config.initial_aoi));
  return state;
}

// Returns every violated invariant as "path: message". Empty means valid.
inline std::vector<std::string> validate_config(const SystemConfig& config) {
  std::vector<std::string> out;
  auto fail = [&](const std::string& path, const std::string& msg) {
    out.push_back(path + ": " + msg);
  };
  if (config.num_sources < 1) fail("num_sources", "must be positive");
  if (config.num_channels < 0) fail("num_channels", "must be nonnegative");
  if (!(config.discount > 0.0 && config.discount < 1.0))
    fail("discount", "discount must lie in (0,1)");
  if (config.horizon < 1) fail("horizon", "must be at least 1");
  if (config.aoi_cap < 2) fail("aoi_cap", "must be at least 2");
  if (config.initial_aoi < 1) fail("initial_aoi", "must be at least 1");
  if (static_cast<std::int64_t>(config.sources.size()) != config.num_sources)
    fail("sources", "expected " + std::to_string(config.num_sources) + " entries, found " +
                        std::to_string(config.sources.size()));
  for (std::size_t m = 0; m < config.sources.size(); ++m) {
    const auto& src = config.sources[m];
    const std::string sp = "sources[" + std::to_string(m) + "]";
    if (src.compute_budget < 0) fail(sp + ".compute_budget", "must be nonnegative");
    if (src.tasks.empty()) fail(sp + ".tasks", "every source needs at least one task");
    for (std::size_t j = 0; j < src.tasks.size(); ++j) {
      const auto& t = src.tasks[j];
      const std::string tp = sp + ".tasks[" + std::to_string(j) + "]";
      if (t.channel_width < 1) fail(tp + ".channel_width", "must be at least 1");
      if (!(t.weight >= 0.0) || !std::isfinite(t.weight))
        fail(tp + ".weight", "must be finite and nonnegative");
      if (t.initial_aoi && *t.initial_aoi < 1) fail(tp + ".initial_aoi", "must be at least 1");
      std::visit(
          [&](const auto& p) {
            using P = std::decay_t<decltype(p)>;
            const std::string pp = tp + ".penalty";
            if constexpr (std::is_same_v<P, LinearPenalty>) {
              if (!(p.slope > 0.0) || !std::isfinite(p.slope)) fail(pp + ".slope", "must be positive");
            } else if constexpr (std::is_same_v<P, ExponentialPenalty>) {
              if (!(p.rate > 0.0) || !std::isfinite(p.rate)) fail(pp + ".rate", "must be positive");
            } else if constexpr (std::is_same_v<P, LogarithmicPenalty>) {
              if (!(p.scale > 0.0) || !std::isfinite(p.scale)) fail(pp + ".scale", "must be positive");
            } else {
              if (p.values.empty()) fail(pp + ".values", "table needs at least one entry");
              for (std::size_t i = 0; i < p.values.size(); ++i)
                if (!(p.values[i] >= 0.0) || !std::isfinite(p.values[i]))
                  fail(pp + ".values[" + std::to_string(i) + "]", "must be finite and nonnegative");
            }
          },
          t.penalty);
    }
  }
  return out;
}

inline void require_valid(const SystemConfig& config) {
  const auto violations = validate_config(config);
  if (violations.empty()) return;
  std::string msg = "invalid configuration:";
  for (const auto& v : violations) msg += "\n  " + v;
  throw std::invalid_argument(msg);
}

struct PenaltyBounds {
  double low = 0.0;
  double high = 0.0;
};

// Extremes of w * p(aoi) over all tasks and aoi in [1, aoi_cap]. Since the
// engine clamps lookups at aoi_cap, every weighted penalty it evaluates lies
// in this range.
inline PenaltyBounds effective_penalty_bounds(const SystemConfig& config) {
  PenaltyBounds b{std::numeric_limits<double>::infinity(),
                  -std::numeric_limits<double>::infinity()};
  for (const auto& s : config.sources)
    for (const auto& t : s.tasks)
      for (Aoi d = 1; d <= config.aoi_cap; ++d) {
        const double v = t.weight * penalty_eval(t.penalty, d);
        b.low = std::min(b.low, v);
        b.high = std::max(b.high, v);
      }
  if (b.low > b.high) b = {0.0, 0.0};
  return b;
}

// Weighted penalty w * p(aoi) with aoi clamped to aoi_cap, indexed 1..aoi_cap
// (slot 0 unused).
inline std::vector<double> weighted_penalty_curve(const SystemConfig& config, TaskId id) {
  const auto& t = config.task(id);
  std::vector<double> curve(static_cast<std::size_t>(config.aoi_cap) + 1, 0.0);
  for (Aoi d = 1; d <= config.aoi_cap; ++d)
    curve[static_cast<std::size_t>(d)] = t.weight * penalty_eval(t.penalty, d);
  return curve;
}

// Tasks at the same source with identical penalty, weight and channel width
// are one class: they share value tables under any multipliers.
struct TaskClasses {
  std::vector<std::size_t> class_of;   // flat task index -> class
  std::vector<TaskId> representative;  // class -> first task of that class
  std::vector<std::size_t> members;    // class -> member count

  std::size_t size() const { return representative.size(); }
};

inline TaskClasses classify_tasks(const SystemConfig& config) {
  TaskClasses out;
  for (const auto& id : config.task_ids()) {
    const auto& t = config.task(id);
    std::size_t found = out.representative.size();
    for (std::size_t c = 0; c < out.representative.size(); ++c) {
      const auto& rep = out.representative[c];
      if (rep.source != id.source) continue;
      const auto& rt = config.task(rep);
      if (rt.weight == t.weight && rt.channel_width == t.channel_width && rt.penalty == t.penalty) {
        found = c;
        break;
      }
    }
    if (found == out.representative.size()) {
      out.representative.push_back(id);
      out.members.push_back(0);
    }
    out.class_of.push_back(found);
    ++out.members[found];
  }
  return out;
}

}  // namespace mtri
