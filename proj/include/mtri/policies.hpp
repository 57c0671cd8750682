#pragma once

// Per-slot schedulers. Every policy fills a slot greedily from a candidate
// order and accepts a task only when both the source's compute budget and the
// shared channel budget still have room.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <variant>
#include <vector>

#include "mtri/dp.hpp"
#include "mtri/dual.hpp"
#include "mtri/model.hpp"

namespace mtri {

struct ActionMatrix {
  std::vector<std::uint8_t> actions;  // flat task order
  std::int64_t slot = 0;
  bool operator==(const ActionMatrix&) const = default;
};

struct ResourceUsage {
  std::vector<std::int64_t> compute;  // per source
  std::int64_t channels = 0;
  bool operator==(const ResourceUsage&) const = default;
};

inline ResourceUsage resource_usage(const SystemConfig& config, const ActionMatrix& a) {
  if (a.actions.size() != config.num_tasks())
    throw std::invalid_argument("action matrix size does not match task count");
  ResourceUsage u;
  u.compute.assign(config.sources.size(), 0);
  std::size_t i = 0;
  for (std::size_t m = 0; m < config.sources.size(); ++m)
    for (const auto& t : config.sources[m].tasks) {
      if (a.actions[i++]) {
        ++u.compute[m];
        u.channels += t.channel_width;
      }
    }
  return u;
}

inline bool is_feasible(const SystemConfig& config, const ResourceUsage& u) {
  for (std::size_t m = 0; m < config.sources.size(); ++m)
    if (u.compute[m] > config.sources[m].compute_budget) return false;
  return u.channels <= config.num_channels;
}

inline bool is_feasible(const SystemConfig& config, const ActionMatrix& a) {
  return is_feasible(config, resource_usage(config, a));
}

// Accepts tasks in `order` while both budgets permit; a rejected task is
// skipped and the scan continues.
inline ActionMatrix greedy_fill(const SystemConfig& config, const std::vector<std::size_t>& order,
                                std::int64_t slot) {
  const auto ids = config.task_ids();
  ActionMatrix out{std::vector<std::uint8_t>(ids.size(), 0), slot};
  std::vector<std::int64_t> compute(config.sources.size(), 0);
  std::int64_t channels = 0;
  for (std::size_t i : order) {
    const auto& id = ids[i];
    const auto width = config.task(id).channel_width;
    if (compute[id.source] + 1 <= config.sources[id.source].compute_budget &&
        channels + width <= config.num_channels) {
      out.actions[i] = 1;
      ++compute[id.source];
      channels += width;
    }
  }
  return out;
}

struct MgfPolicy {
  SubgradientSettings dual;
  std::int64_t reoptimize_every = 1;
};

struct MafPolicy {};

struct RandomPolicy {
  std::uint64_t seed = 0;
};

using PolicyKind = std::variant<MgfPolicy, MafPolicy, RandomPolicy>;

inline std::string policy_name(const PolicyKind& p) {
  switch (p.index()) {
    case 0: return "mgf";
    case 1: return "maf";
    default: return "random";
  }
}

struct MgfDecision {
  ActionMatrix actions;
  DualResult dual;
  GainVector gains;
  // Tasks whose relaxed action is active but were rejected by the budgets.
  std::int64_t divergence = 0;
};

// Greedy pass over the positive gains, highest first; equal gains go in
// (m, j) order. Also returns how many positive-gain tasks were rejected.
inline std::pair<ActionMatrix, std::int64_t> mgf_select(const SystemConfig& config,
                                                        const std::vector<double>& gains,
                                                        std::int64_t slot) {
  if (gains.size() != config.num_tasks()) throw std::invalid_argument("mgf_select: one gain per task");
  std::vector<std::size_t> positive;
  for (std::size_t i = 0; i < gains.size(); ++i)
    if (gains[i] > 0.0) positive.push_back(i);
  std::stable_sort(positive.begin(), positive.end(),
                   [&](std::size_t a, std::size_t b) { return gains[a] > gains[b]; });
  auto actions = greedy_fill(config, positive, slot);
  std::int64_t rejected = 0;
  for (std::size_t i : positive)
    if (!actions.actions[i]) ++rejected;
  return {std::move(actions), rejected};
}

// Reoptimized maximum-gain-first. Prices are re-solved at horizon T - slot
// (warm-started from `cached` when given), unless `cached` is supplied and the
// slot is not a reoptimization slot, in which case they are reused as is.
inline MgfDecision mgf_decide(const SystemConfig& config, const AoIState& state, std::int64_t slot,
                              const std::optional<MultiplierSet>& cached, const MgfPolicy& policy,
                              const TaskClasses& classes, ValueTableCache& cache) {
  if (slot < 0 || slot >= config.horizon) throw std::invalid_argument("mgf_decide: slot outside horizon");
  if (policy.reoptimize_every < 1) throw std::invalid_argument("mgf_decide: reoptimize_every must be >= 1");
  const std::int64_t horizon = config.horizon - slot;

  MgfDecision out;
  if (cached && slot % policy.reoptimize_every != 0) {
    out.dual.multipliers = *cached;
    const auto ev = evaluate_dual(config, state, *cached, horizon, classes, cache);
    out.dual.dual_value = ev.dual_value;
    out.dual.per_task_occupancy = ev.occupancy;
  } else {
    SubgradientSettings settings = policy.dual;
    if (cached) settings.warm_start = *cached;
    out.dual = subgradient_ascent(config, state, horizon, settings, classes, cache);
  }

  const std::size_t k = config.num_tasks();
  out.gains.slot = slot;
  out.gains.state = state;
  out.gains.gains.resize(k);
  const Aoi reach = max_aoi(state);
  for (std::size_t i = 0; i < k; ++i) {
    const auto table =
        cache.get(config, classes, classes.class_of[i], out.dual.multipliers, horizon, reach);
    out.gains.gains[i] = gain_index(*table, state.aoi[i]);
  }
  std::tie(out.actions, out.divergence) = mgf_select(config, out.gains.gains, slot);
  return out;
}

inline MgfDecision mgf_decide(const SystemConfig& config, const AoIState& state, std::int64_t slot,
                              const std::optional<MultiplierSet>& cached, const MgfPolicy& policy = {}) {
  const auto classes = classify_tasks(config);
  ValueTableCache cache;
  return mgf_decide(config, state, slot, cached, policy, classes, cache);
}

// Maximum-age-first: decreasing AoI, ties in (m, j) order.
inline ActionMatrix maf_decide(const SystemConfig& config, const AoIState& state, std::int64_t slot) {
  std::vector<std::size_t> order(config.num_tasks());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return state.aoi[a] > state.aoi[b]; });
  return greedy_fill(config, order, slot);
}

// Uniform draw without replacement, accepting whatever fits.
template <class Rng>
ActionMatrix random_decide(const SystemConfig& config, const AoIState&, std::int64_t slot, Rng& rng) {
  std::vector<std::size_t> order(config.num_tasks());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  return greedy_fill(config, order, slot);
}

}  // namespace mtri
