#pragma once

// Lagrangian dual with time-invariant prices (lambda_1..lambda_M, mu) and its
// maximization by projected subgradient ascent.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mtri/dp.hpp"
#include "mtri/model.hpp"

namespace mtri {

struct SubgradientSettings {
  std::int64_t iterations = 100;
  // Per-source base steps; empty means 1.0 for every source.
  std::vector<double> base_step_source;
  double base_step_channel = 1.0;
  std::optional<MultiplierSet> warm_start;
};

struct DualEvaluation {
  double dual_value = 0.0;
  std::vector<double> occupancy;     // per task, sum_t g^t pi*(t)
  std::vector<double> source_usage;  // per source, sum over its tasks
  double channel_usage = 0.0;        // sum over tasks of n * occupancy
  std::vector<std::uint8_t> first_action;  // relaxed action pi*(0) per task
};

struct DualResult {
  MultiplierSet multipliers;
  double dual_value = 0.0;
  std::vector<double> per_task_occupancy;
  std::int64_t iterations_run = 0;
};

// sum_{s=0}^{h-1} g^s
inline double discounted_slots(double discount, std::int64_t horizon) {
  return (1.0 - std::pow(discount, static_cast<double>(horizon))) / (1.0 - discount);
}

inline Aoi max_aoi(const AoIState& state) {
  Aoi d = 1;
  for (Aoi a : state.aoi) d = a > d ? a : d;
  return d;
}

namespace detail {

inline void check_dual_inputs(const SystemConfig& config, const AoIState& state,
                              const MultiplierSet& multipliers, std::int64_t horizon) {
  if (horizon < 1) throw std::invalid_argument("dual: horizon_to_go must be >= 1");
  if (state.aoi.size() != config.num_tasks())
    throw std::invalid_argument("dual: AoI state size does not match task count");
  if (multipliers.source_price.size() != config.sources.size())
    throw std::invalid_argument("dual: multiplier count does not match sources");
}

}  // namespace detail

// Dual function value at fixed prices, normalized by K, plus the relaxed
// per-task occupancies (exact: transitions are deterministic).
inline DualEvaluation evaluate_dual(const SystemConfig& config, const AoIState& state,
                                    const MultiplierSet& multipliers, std::int64_t horizon_to_go,
                                    const TaskClasses& classes, ValueTableCache& cache) {
  detail::check_dual_inputs(config, state, multipliers, horizon_to_go);
  const auto ids = config.task_ids();
  const std::size_t k = ids.size();

  DualEvaluation ev;
  ev.occupancy.assign(k, 0.0);
  ev.source_usage.assign(config.sources.size(), 0.0);
  ev.first_action.assign(k, 0);

  // Rollouts depend only on (class, clamped start AoI).
  std::map<std::pair<std::size_t, Aoi>, std::pair<double, std::uint8_t>> memo;
  const Aoi reach = max_aoi(state);
  double value_sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t cls = classes.class_of[i];
    const auto table = cache.get(config, classes, cls, multipliers, horizon_to_go, reach);
    const Aoi start = table->clamp(state.aoi[i]);
    value_sum += table->value(horizon_to_go, start);
    auto [it, inserted] = memo.try_emplace({cls, start});
    if (inserted) {
      const auto r = detail::rollout(cache.curve_for(config, classes, cls), *table, start);
      it->second = {r.occupancy, r.actions.front()};
    }
    ev.occupancy[i] = it->second.first;
    ev.first_action[i] = it->second.second;
    ev.source_usage[ids[i].source] += ev.occupancy[i];
    ev.channel_usage += ev.occupancy[i] * static_cast<double>(config.task(ids[i]).channel_width);
  }

  const double slots = discounted_slots(config.discount, horizon_to_go);
  double penalty_terms = multipliers.channel_price * static_cast<double>(config.num_channels) * slots;
  for (std::size_t m = 0; m < config.sources.size(); ++m)
    penalty_terms += multipliers.source_price[m] *
                     static_cast<double>(config.sources[m].compute_budget) * slots;
  ev.dual_value = (value_sum - penalty_terms) / static_cast<double>(k);
  return ev;
}

inline DualEvaluation evaluate_dual(const SystemConfig& config, const AoIState& state,
                                    const MultiplierSet& multipliers, std::int64_t horizon_to_go) {
  const auto classes = classify_tasks(config);
  ValueTableCache cache;
  return evaluate_dual(config, state, multipliers, horizon_to_go, classes, cache);
}

// Projected subgradient ascent with diminishing steps beta / (K i). Returns
// the best iterate seen, since subgradient steps need not increase the dual.
inline DualResult subgradient_ascent(const SystemConfig& config, const AoIState& state,
                                     std::int64_t horizon_to_go, const SubgradientSettings& settings,
                                     const TaskClasses& classes, ValueTableCache& cache) {
  if (settings.iterations < 1) throw std::invalid_argument("subgradient_ascent: iterations must be >= 1");
  const std::size_t num_sources = config.sources.size();
  std::vector<double> steps = settings.base_step_source;
  if (steps.empty()) steps.assign(num_sources, 1.0);
  if (steps.size() != num_sources)
    throw std::invalid_argument("subgradient_ascent: base_step_source size does not match sources");
  for (double b : steps)
    if (!(b > 0.0)) throw std::invalid_argument("subgradient_ascent: step sizes must be positive");
  if (!(settings.base_step_channel > 0.0))
    throw std::invalid_argument("subgradient_ascent: step sizes must be positive");

  MultiplierSet x = settings.warm_start.value_or(MultiplierSet::zeros(num_sources));
  if (x.source_price.size() != num_sources || !x.nonnegative())
    throw std::invalid_argument("subgradient_ascent: warm start must be nonnegative with one price per source");

  const double k = static_cast<double>(config.num_tasks());
  const double slots = discounted_slots(config.discount, horizon_to_go);

  DualResult best;
  bool have_best = false;
  for (std::int64_t i = 1; i <= settings.iterations; ++i) {
    auto ev = evaluate_dual(config, state, x, horizon_to_go, classes, cache);
    if (!have_best || ev.dual_value > best.dual_value) {
      best.multipliers = x;
      best.dual_value = ev.dual_value;
      best.per_task_occupancy = std::move(ev.occupancy);
      have_best = true;
    }
    const double scale = 1.0 / (k * static_cast<double>(i));
    for (std::size_t m = 0; m < num_sources; ++m) {
      const double sub = ev.source_usage[m] -
                         static_cast<double>(config.sources[m].compute_budget) * slots;
      x.source_price[m] = std::max(x.source_price[m] + steps[m] * scale * sub, 0.0);
    }
    const double sub = ev.channel_usage - static_cast<double>(config.num_channels) * slots;
    x.channel_price = std::max(x.channel_price + settings.base_step_channel * scale * sub, 0.0);
  }
  best.iterations_run = settings.iterations;
  return best;
}

inline DualResult subgradient_ascent(const SystemConfig& config, const AoIState& state,
                                     std::int64_t horizon_to_go, const SubgradientSettings& settings) {
  const auto classes = classify_tasks(config);
  ValueTableCache cache;
  return subgradient_ascent(config, state, horizon_to_go, settings, classes, cache);
}

}  // namespace mtri
