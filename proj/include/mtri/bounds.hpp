#pragma once

// Optimality certificates for MGF: a weak-duality lower bound, the
// closed-form asymptotic gap bound for r-fold multiplied instances, the
// per-slot divergence bound, and an exhaustive oracle for tiny instances.

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mtri/dual.hpp"
#include "mtri/model.hpp"
#include "mtri/policies.hpp"
#include "mtri/sim.hpp"

namespace mtri {

// Best dual value from the initial state over the full horizon. Lower-bounds
// the truncated cost of every feasible policy.
inline double dual_lower_bound(const SystemConfig& config, const SubgradientSettings& settings = {}) {
  require_valid(config);
  return subgradient_ascent(config, initial_state(config), config.horizon, settings).dual_value;
}

// Replicates every task r times inside its source (replica-major, so task
// j' = rep * k_m + j copies base task j) and multiplies C_m and N by r.
inline SystemConfig scale_instance(const SystemConfig& base, std::int64_t r) {
  if (r < 1) throw std::invalid_argument("scale_instance: r must be >= 1");
  SystemConfig out = base;
  out.num_channels = base.num_channels * r;
  for (std::size_t m = 0; m < base.sources.size(); ++m) {
    auto& src = out.sources[m];
    src.compute_budget = base.sources[m].compute_budget * r;
    src.tasks.clear();
    for (std::int64_t rep = 0; rep < r; ++rep)
      src.tasks.insert(src.tasks.end(), base.sources[m].tasks.begin(), base.sources[m].tasks.end());
  }
  return out;
}

// sum_m sqrt(r k_m)
inline double sqrt_task_mass(const SystemConfig& config, std::int64_t r = 1) {
  double s = 0.0;
  for (const auto& src : config.sources)
    s += std::sqrt(static_cast<double>(r) * static_cast<double>(src.tasks.size()));
  return s;
}

struct Theorem1Bound {
  double rhs = 0.0;
  bool horizon_ok = false;
};

// Right-hand side of the asymptotic gap bound for the r-multiplied instance:
//   (1 / sum_m sqrt(r k_m)) * [ 2M dp g / (1-g)^3 + dp g / (1-g) ],
// with dp = p_high - p_low. Valid only when T >= log_{1/g} sum_m sqrt(r k_m).
inline Theorem1Bound theorem1_rhs(const SystemConfig& base, std::int64_t r) {
  if (r < 1) throw std::invalid_argument("theorem1_rhs: r must be >= 1");
  const auto b = effective_penalty_bounds(base);  // replication keeps the bounds
  const double spread = b.high - b.low;
  const double g = base.discount;
  const double mass = sqrt_task_mass(base, r);
  const double m = static_cast<double>(base.sources.size());
  Theorem1Bound out;
  out.rhs = (2.0 * m * spread * g / std::pow(1.0 - g, 3) + spread * g / (1.0 - g)) / mass;
  out.horizon_ok = static_cast<double>(base.horizon) >= std::log(mass) / std::log(1.0 / g);
  return out;
}

struct GapCertificate {
  std::int64_t scale_r = 1;
  double mgf_cost = 0.0;
  double dual_lower_bound = 0.0;
  double gap = 0.0;
  double theorem1_rhs = 0.0;
  bool horizon_ok = false;

  bool holds() const { return gap <= theorem1_rhs; }
};

inline GapCertificate certify(const SystemConfig& base, std::int64_t r, const MgfPolicy& policy = {}) {
  const auto scaled = scale_instance(base, r);
  GapCertificate c;
  c.scale_r = r;
  c.mgf_cost = run(scaled, policy, 0).discounted_cost;
  c.dual_lower_bound = dual_lower_bound(scaled, policy.dual);
  c.gap = c.mgf_cost - c.dual_lower_bound;
  const auto t1 = theorem1_rhs(base, r);
  c.theorem1_rhs = t1.rhs;
  c.horizon_ok = t1.horizon_ok;
  return c;
}

struct BruteForceResult {
  double optimal_cost = 0.0;
  std::vector<ActionMatrix> actions;  // one per slot
};

inline constexpr double kBruteForceLimit = 1e7;

// Exact minimum of the truncated discounted objective by enumerating every
// feasible action set per slot. Memoizes on (slot, AoI vector); AoI is kept
// unclamped so the result is exact for any penalty.
inline BruteForceResult brute_force_optimal(const SystemConfig& config) {
  require_valid(config);
  const std::size_t k = config.num_tasks();
  if (k > 20) throw std::invalid_argument("brute_force_optimal: too many tasks to enumerate");

  std::vector<std::vector<std::uint8_t>> feasible;
  for (std::uint32_t mask = 0; mask < (1u << k); ++mask) {
    ActionMatrix a{std::vector<std::uint8_t>(k, 0), 0};
    for (std::size_t i = 0; i < k; ++i) a.actions[i] = (mask >> i) & 1u;
    if (is_feasible(config, a)) feasible.push_back(std::move(a.actions));
  }
  const double sequences = std::pow(static_cast<double>(feasible.size()), static_cast<double>(config.horizon));
  if (sequences > kBruteForceLimit)
    throw std::invalid_argument("brute_force_optimal: instance exceeds the enumeration guard");

  const double g = config.discount;
  // memo maps (slot, state) -> (cost-to-go discounted from that slot, best set)
  std::map<std::pair<std::int64_t, std::vector<Aoi>>, std::pair<double, std::size_t>> memo;

  auto solve = [&](auto&& self, std::int64_t t, const std::vector<Aoi>& aoi) -> double {
    if (t == config.horizon) return 0.0;
    const auto key = std::make_pair(t, aoi);
    if (auto it = memo.find(key); it != memo.end()) return it->second.first;
    const double here = slot_cost(config, AoIState{aoi});
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_idx = 0;
    std::vector<Aoi> next(k);
    for (std::size_t f = 0; f < feasible.size(); ++f) {
      for (std::size_t i = 0; i < k; ++i) next[i] = feasible[f][i] ? 1 : aoi[i] + 1;
      const double v = here + g * self(self, t + 1, next);
      if (v < best) {
        best = v;
        best_idx = f;
      }
    }
    memo.emplace(key, std::make_pair(best, best_idx));
    return best;
  };

  BruteForceResult out;
  auto aoi = initial_state(config).aoi;
  out.optimal_cost = solve(solve, 0, aoi);
  for (std::int64_t t = 0; t < config.horizon; ++t) {
    const auto idx = memo.at({t, aoi}).second;
    out.actions.push_back(ActionMatrix{feasible[idx], t});
    for (std::size_t i = 0; i < k; ++i) aoi[i] = feasible[idx][i] ? 1 : aoi[i] + 1;
  }
  return out;
}

struct DivergenceReport {
  double mean_divergence = 0.0;
  double lemma2_bound = 0.0;
  std::int64_t slots_measured = 0;
  // The bound is derived for unit channel widths only.
  bool bound_applies = false;
};

// sum_m sqrt(k_m) + sqrt(sum_m k_m)
inline double lemma2_bound(const SystemConfig& config) {
  return sqrt_task_mass(config) + std::sqrt(static_cast<double>(config.num_tasks()));
}

inline DivergenceReport divergence_report(const SystemConfig& config, const SimResult& mgf_run) {
  if (!mgf_run.divergence_trace)
    throw std::invalid_argument("divergence_report: run has no divergence trace (not an MGF run)");
  DivergenceReport r;
  const auto& trace = *mgf_run.divergence_trace;
  r.slots_measured = static_cast<std::int64_t>(trace.size());
  double total = 0.0;
  for (auto d : trace) total += static_cast<double>(d);
  r.mean_divergence = trace.empty() ? 0.0 : total / static_cast<double>(trace.size());
  r.lemma2_bound = lemma2_bound(config);
  r.bound_applies = true;
  for (const auto& s : config.sources)
    for (const auto& t : s.tasks)
      if (t.channel_width != 1) r.bound_applies = false;
  return r;
}

}  // namespace mtri
