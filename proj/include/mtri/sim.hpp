#pragma once

// Discrete-time simulation over the truncated horizon. Each slot charges the
// pre-transition AoI, then applies the policy's actions:
//   AoI(t+1) = 1 if the task was scheduled at t, AoI(t) + 1 otherwise.

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mtri/dual.hpp"
#include "mtri/model.hpp"
#include "mtri/policies.hpp"

namespace mtri {

struct SimResult {
  double discounted_cost = 0.0;  // sum_t g^t / K sum w p(AoI(t))
  double raw_cost = 0.0;         // same without the 1/K factor
  std::vector<double> per_slot_cost;  // g^t / K sum w p(AoI(t))
  std::vector<AoIState> aoi_trace;    // state at the start of each slot
  std::vector<ActionMatrix> action_trace;
  std::vector<ResourceUsage> resource_usage;
  std::optional<std::vector<std::int64_t>> divergence_trace;  // MGF only
  std::vector<MultiplierSet> multiplier_trace;                // MGF only
  AoIState final_state;
  double tail_bound = 0.0;
};

struct StepResult {
  AoIState next_state;
  double slot_cost = 0.0;  // (1/K) sum w p(AoI(t)), undiscounted
};

inline double slot_cost(const SystemConfig& config, const AoIState& state) {
  double total = 0.0;
  std::size_t i = 0;
  for (const auto& s : config.sources)
    for (const auto& t : s.tasks) total += t.weight * penalty_eval(t.penalty, state.aoi[i++]);
  return total / static_cast<double>(config.num_tasks());
}

inline StepResult step(const SystemConfig& config, const AoIState& state, const ActionMatrix& actions) {
  if (state.aoi.size() != config.num_tasks())
    throw std::invalid_argument("step: AoI state size does not match task count");
  if (!is_feasible(config, actions)) throw std::invalid_argument("step: action matrix violates a budget");
  StepResult out;
  out.slot_cost = slot_cost(config, state);
  out.next_state.aoi.resize(state.aoi.size());
  for (std::size_t i = 0; i < state.aoi.size(); ++i)
    out.next_state.aoi[i] = actions.actions[i] ? 1 : state.aoi[i] + 1;
  return out;
}

// g^T (p_high - p_low) / (1 - g): how much the discarded tail can move the cost.
inline double tail_bound(const SystemConfig& config) {
  const auto b = effective_penalty_bounds(config);
  return std::pow(config.discount, static_cast<double>(config.horizon)) * (b.high - b.low) /
         (1.0 - config.discount);
}

inline SimResult run(const SystemConfig& config, const PolicyKind& policy, std::uint64_t seed) {
  require_valid(config);
  const std::size_t k = config.num_tasks();
  const auto classes = classify_tasks(config);
  ValueTableCache cache;
  std::mt19937_64 rng(seed);
  std::optional<MultiplierSet> prices;

  SimResult res;
  res.tail_bound = tail_bound(config);
  const bool is_mgf = std::holds_alternative<MgfPolicy>(policy);
  if (is_mgf) res.divergence_trace.emplace();

  AoIState state = initial_state(config);
  double disc = 1.0;
  for (std::int64_t t = 0; t < config.horizon; ++t) {
    ActionMatrix actions;
    if (const auto* mgf = std::get_if<MgfPolicy>(&policy)) {
      auto d = mgf_decide(config, state, t, prices, *mgf, classes, cache);
      prices = d.dual.multipliers;
      res.multiplier_trace.push_back(d.dual.multipliers);
      res.divergence_trace->push_back(d.divergence);
      actions = std::move(d.actions);
    } else if (std::holds_alternative<MafPolicy>(policy)) {
      actions = maf_decide(config, state, t);
    } else {
      actions = random_decide(config, state, t, rng);
    }
    auto [next, cost] = step(config, state, actions);
    const double discounted = disc * cost;
    res.per_slot_cost.push_back(discounted);
    res.discounted_cost += discounted;
    res.raw_cost += discounted * static_cast<double>(k);
    res.resource_usage.push_back(resource_usage(config, actions));
    res.aoi_trace.push_back(std::move(state));
    res.action_trace.push_back(std::move(actions));
    state = std::move(next);
    disc *= config.discount;
  }
  res.final_state = std::move(state);
  return res;
}

// Random policies draw from their own seed.
inline SimResult run(const SystemConfig& config, const PolicyKind& policy) {
  const auto* r = std::get_if<RandomPolicy>(&policy);
  return run(config, policy, r ? r->seed : 0);
}

}  // namespace mtri
