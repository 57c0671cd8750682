#pragma once

// Finite-horizon dynamic programming for one task of the Lagrangian-relaxed
// problem. With prices attached to the two resource constraints the tasks
// decouple; each solves
//
//   V[s][d] = w p(d) + min( g V[s-1][d+1],  lambda_m + mu n + g V[s-1][1] ),
//   V[0][d] = 0,
//
// where s counts slots remaining. AoI lookups clamp at aoi_cap.

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "mtri/model.hpp"

namespace mtri {

struct MultiplierSet {
  std::vector<double> source_price;  // lambda_m, one per source
  double channel_price = 0.0;        // mu

  static MultiplierSet zeros(std::size_t num_sources) {
    return MultiplierSet{std::vector<double>(num_sources, 0.0), 0.0};
  }

  // Price a task pays for being active in one slot.
  double task_price(const SystemConfig& config, TaskId id) const {
    return source_price.at(id.source) +
           channel_price * static_cast<double>(config.task(id).channel_width);
  }

  bool nonnegative() const {
    for (double l : source_price)
      if (!(l >= 0.0)) return false;
    return channel_price >= 0.0;
  }

  bool operator==(const MultiplierSet&) const = default;
};

// V[s][aoi] for s = 0..horizon (s = 0 is the terminal row). Row s stores AoI
// 1..row_extent(s); lookups past the cap read the cap column.
class ValueTable {
 public:
  // `reach` is the largest start AoI the table must serve at its top row. Row
  // s then needs AoI up to reach + (horizon - s). reach >= aoi_cap gives the
  // full table.
  ValueTable(TaskId task, std::int64_t horizon, std::int64_t aoi_cap, double discount,
             double price, MultiplierSet multipliers, Aoi reach) {
    reset(task, horizon, aoi_cap, discount, price, std::move(multipliers), reach);
  }

  ValueTable(TaskId task, std::int64_t horizon, std::int64_t aoi_cap, double discount,
             double price, MultiplierSet multipliers)
      : ValueTable(task, horizon, aoi_cap, discount, price, std::move(multipliers), aoi_cap) {}

  // Re-targets the table, reusing its storage. Only the terminal row is
  // initialized; the rest must be filled before use.
  void reset(TaskId task, std::int64_t horizon, std::int64_t aoi_cap, double discount,
             double price, MultiplierSet multipliers, Aoi reach) {
    task_ = task;
    horizon_ = horizon;
    aoi_cap_ = aoi_cap;
    discount_ = discount;
    price_ = price;
    multipliers_ = std::move(multipliers);
    reach_ = reach < aoi_cap ? reach : aoi_cap;
    offsets_.resize(static_cast<std::size_t>(horizon + 2));
    std::size_t total = 0;
    for (std::int64_t s = 0; s <= horizon; ++s) {
      offsets_[static_cast<std::size_t>(s)] = total;
      total += static_cast<std::size_t>(row_extent(s));
    }
    offsets_.back() = total;
    if (values_.size() < total) values_.resize(total);
    std::fill_n(values_.begin(), offsets_[1], 0.0);
  }

  TaskId task() const { return task_; }
  std::int64_t horizon() const { return horizon_; }
  std::int64_t aoi_cap() const { return aoi_cap_; }
  double discount() const { return discount_; }
  // lambda_m + mu * n for the owning task.
  double price() const { return price_; }
  const MultiplierSet& multipliers() const { return multipliers_; }
  Aoi reach() const { return reach_; }

  std::int64_t row_extent(std::int64_t steps_to_go) const {
    const std::int64_t e = reach_ + (horizon_ - steps_to_go);
    return e < aoi_cap_ ? e : aoi_cap_;
  }

  double value(std::int64_t steps_to_go, Aoi aoi) const {
    const Aoi d = clamp(aoi);
    assert(d <= row_extent(steps_to_go));
    return values_[offsets_[static_cast<std::size_t>(steps_to_go)] + static_cast<std::size_t>(d - 1)];
  }

  std::span<const double> row(std::int64_t steps_to_go) const {
    const auto s = static_cast<std::size_t>(steps_to_go);
    return {values_.data() + offsets_[s], offsets_[s + 1] - offsets_[s]};
  }

  std::span<double> mutable_row(std::int64_t steps_to_go) {
    const auto s = static_cast<std::size_t>(steps_to_go);
    return {values_.data() + offsets_[s], offsets_[s + 1] - offsets_[s]};
  }

  Aoi clamp(Aoi aoi) const { return aoi < aoi_cap_ ? aoi : aoi_cap_; }

 private:
  TaskId task_{};
  std::int64_t horizon_ = 0;
  std::int64_t aoi_cap_ = 0;
  double discount_ = 0.0;
  double price_ = 0.0;
  MultiplierSet multipliers_;
  Aoi reach_ = 0;
  std::vector<std::size_t> offsets_;
  std::vector<double> values_;
};

namespace detail {

// curve is indexed 1..aoi_cap (see weighted_penalty_curve).
inline void fill_value_table(std::span<const double> curve, ValueTable& table) {
  const std::int64_t cap = table.aoi_cap();
  const double g = table.discount();
  const double price = table.price();
  for (std::int64_t s = 1; s <= table.horizon(); ++s) {
    const auto prev = table.row(s - 1);
    auto cur = table.mutable_row(s);
    const double active = price + g * prev[0];
    const std::int64_t extent = table.row_extent(s);
    const std::int64_t open = extent < cap ? extent : cap - 1;
    for (std::int64_t d = 1; d <= open; ++d) {
      const double passive = g * prev[static_cast<std::size_t>(d)];
      cur[static_cast<std::size_t>(d - 1)] =
          curve[static_cast<std::size_t>(d)] + (passive < active ? passive : active);
    }
    if (extent == cap) {
      const double passive = g * prev[static_cast<std::size_t>(cap - 1)];
      cur[static_cast<std::size_t>(cap - 1)] =
          curve[static_cast<std::size_t>(cap)] + (passive < active ? passive : active);
    }
  }
}

}  // namespace detail

inline ValueTable backward_induction(const SystemConfig& config, TaskId task,
                                     const MultiplierSet& multipliers,
                                     std::int64_t horizon_to_go) {
  if (horizon_to_go < 1) throw std::invalid_argument("backward_induction: horizon_to_go must be >= 1");
  (void)config.task(task);  // bounds check
  if (multipliers.source_price.size() != config.sources.size())
    throw std::invalid_argument("backward_induction: multiplier count does not match sources");
  ValueTable table(task, horizon_to_go, config.aoi_cap, config.discount,
                   multipliers.task_price(config, task), multipliers);
  const auto curve = weighted_penalty_curve(config, task);
  detail::fill_value_table(curve, table);
  return table;
}

// Q(aoi, action) at the table's top row.
inline double q_value(const ValueTable& table, const SystemConfig& config, Aoi aoi, int action) {
  const auto& t = config.task(table.task());
  const double instant = t.weight * penalty_eval(t.penalty, table.clamp(aoi));
  const std::int64_t s = table.horizon();
  const double g = table.discount();
  if (action == 0) return instant + g * table.value(s - 1, aoi + 1);
  return instant + table.price() + g * table.value(s - 1, 1);
}

// Gain index: Q(aoi, 0) - Q(aoi, 1). The instantaneous penalty cancels.
inline double gain_index(const ValueTable& table, Aoi aoi) {
  const std::int64_t s = table.horizon();
  const double g = table.discount();
  return g * table.value(s - 1, aoi + 1) - table.price() - g * table.value(s - 1, 1);
}

inline double gain_index(const ValueTable& table, const SystemConfig&, Aoi aoi) {
  return gain_index(table, aoi);
}

struct GainVector {
  std::vector<double> gains;
  std::int64_t slot = 0;
  AoIState state;
};

struct RolloutResult {
  std::vector<std::uint8_t> actions;  // one per slot, earliest first
  double occupancy = 0.0;             // sum_t g^t a(t)
  double cost = 0.0;                  // sum_t g^t (w p(d_t) + a(t) price)
};

namespace detail {

inline RolloutResult rollout(std::span<const double> curve, const ValueTable& table, Aoi start) {
  RolloutResult out;
  out.actions.reserve(static_cast<std::size_t>(table.horizon()));
  const double g = table.discount();
  double disc = 1.0;
  Aoi aoi = start;
  for (std::int64_t s = table.horizon(); s >= 1; --s) {
    const double gain = g * table.value(s - 1, aoi + 1) - table.price() - g * table.value(s - 1, 1);
    const std::uint8_t a = gain > 0.0 ? 1 : 0;  // ties stay passive
    out.actions.push_back(a);
    out.cost += disc * (curve[static_cast<std::size_t>(table.clamp(aoi))] + (a ? table.price() : 0.0));
    out.occupancy += a ? disc : 0.0;
    aoi = a ? 1 : aoi + 1;
    disc *= g;
  }
  return out;
}

}  // namespace detail

// Forward simulation of the per-task relaxed optimal policy from start_aoi.
inline RolloutResult relaxed_rollout(const SystemConfig& config, TaskId task,
                                     const ValueTable& table, Aoi start_aoi) {
  const auto curve = weighted_penalty_curve(config, task);
  return detail::rollout(curve, table, start_aoi);
}

// Shares value tables between tasks of the same class. Keys use the exact
// multiplier bits so a hit always returns the table a rebuild would produce.
class ValueTableCache {
 public:
  explicit ValueTableCache(std::size_t max_entries = 512) : max_entries_(max_entries) {}

  // `reach` bounds the start AoIs the caller will look up (see
  // ValueTable::reach); pass aoi_cap for a full table.
  std::shared_ptr<const ValueTable> get(const SystemConfig& config, const TaskClasses& classes,
                                        std::size_t cls, const MultiplierSet& multipliers,
                                        std::int64_t horizon, Aoi reach) {
    const TaskId rep = classes.representative[cls];
    reach = reach < config.aoi_cap ? reach : config.aoi_cap;
    const Key key{cls, horizon, reach, multipliers.source_price.at(rep.source),
                  multipliers.channel_price};
    if (auto it = entries_.find(key); it != entries_.end()) {
      ++hits_;
      return it->second;
    }
    ++misses_;
    if (entries_.size() >= max_entries_) evict();
    auto& curve = curve_for(config, classes, cls);
    std::shared_ptr<ValueTable> table;
    if (!spare_.empty()) {
      table = std::move(spare_.back());
      spare_.pop_back();
      table->reset(rep, horizon, config.aoi_cap, config.discount,
                   multipliers.task_price(config, rep), multipliers, reach);
    } else {
      table = std::make_shared<ValueTable>(rep, horizon, config.aoi_cap, config.discount,
                                           multipliers.task_price(config, rep), multipliers, reach);
    }
    detail::fill_value_table(curve, *table);
    entries_.emplace(key, table);
    return table;
  }

  const std::vector<double>& curve_for(const SystemConfig& config, const TaskClasses& classes,
                                       std::size_t cls) {
    if (curves_.size() < classes.size()) curves_.resize(classes.size());
    auto& c = curves_[cls];
    if (c.empty()) c = weighted_penalty_curve(config, classes.representative[cls]);
    return c;
  }

  std::size_t hits() const { return hits_; }
  std::size_t misses() const { return misses_; }

 private:
  // Drops every entry; tables nobody else holds are kept for reuse.
  void evict() {
    for (auto& [key, table] : entries_)
      if (table.use_count() == 1) spare_.push_back(std::const_pointer_cast<ValueTable>(table));
    entries_.clear();
  }

  using Key = std::tuple<std::size_t, std::int64_t, Aoi, double, double>;
  std::size_t max_entries_;
  std::map<Key, std::shared_ptr<const ValueTable>> entries_;
  std::vector<std::shared_ptr<ValueTable>> spare_;
  std::vector<std::vector<double>> curves_;
  std::size_t hits_ = 0;
  std::size_t misses_ = 0;
};

}  // namespace mtri
