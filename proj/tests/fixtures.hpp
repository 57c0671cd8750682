#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "mtri/model.hpp"

namespace mtri::testing {

inline TaskConfig task(PenaltyFunction p, double w = 1.0, std::int64_t width = 1) {
  TaskConfig t;
  t.channel_width = width;
  t.weight = w;
  t.penalty = std::move(p);
  return t;
}

inline SystemConfig one_source(std::vector<TaskConfig> tasks, std::int64_t budget, std::int64_t channels,
                               double discount = 0.9, std::int64_t horizon = 10, std::int64_t cap = 20) {
  SystemConfig c;
  c.num_sources = 1;
  c.num_channels = channels;
  c.discount = discount;
  c.horizon = horizon;
  c.aoi_cap = cap;
  c.sources.push_back({budget, std::move(tasks)});
  return c;
}

// M=1, k=2 (d and 10 ln d), C=N=1, g=0.9, T=4, cap 6.
inline SystemConfig tiny_oracle() {
  return one_source({task(LinearPenalty{1.0}), task(LogarithmicPenalty{10.0})}, 1, 1, 0.9, 4, 6);
}

// M=3 sources with one task each (d, exp(0.5 d), 10 ln d), C=N=1.
inline SystemConfig certify_base(std::int64_t horizon = 30, std::int64_t cap = 40) {
  SystemConfig c;
  c.num_sources = 3;
  c.num_channels = 1;
  c.discount = 0.9;
  c.horizon = horizon;
  c.aoi_cap = cap;
  c.sources.push_back({1, {task(LinearPenalty{1.0})}});
  c.sources.push_back({1, {task(ExponentialPenalty{0.5})}});
  c.sources.push_back({1, {task(LogarithmicPenalty{10.0})}});
  return c;
}

inline PenaltyFunction random_penalty(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> kind(0, 3);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  switch (kind(rng)) {
    case 0: return LinearPenalty{u(rng)};
    case 1: return ExponentialPenalty{u(rng) * 0.3};
    case 2: return LogarithmicPenalty{u(rng) * 5.0};
    default: {
      std::vector<double> v(std::uniform_int_distribution<int>(1, 8)(rng));
      double acc = 0.0;
      for (auto& x : v) x = acc += u(rng);
      return TabulatedPenalty{v};
    }
  }
}

inline SystemConfig random_config(std::mt19937_64& rng, std::int64_t max_sources, std::int64_t max_tasks,
                                  std::int64_t horizon, std::int64_t cap) {
  std::uniform_int_distribution<std::int64_t> sources(1, max_sources), tasks(1, max_tasks);
  std::uniform_int_distribution<std::int64_t> width(1, 3);
  std::uniform_real_distribution<double> weight(0.0, 2.0), disc(0.5, 0.95);
  SystemConfig c;
  c.num_sources = sources(rng);
  c.discount = disc(rng);
  c.horizon = horizon;
  c.aoi_cap = cap;
  std::int64_t total_width = 0;
  for (std::int64_t m = 0; m < c.num_sources; ++m) {
    SourceConfig s;
    const auto k = tasks(rng);
    s.compute_budget = std::uniform_int_distribution<std::int64_t>(0, k)(rng);
    for (std::int64_t j = 0; j < k; ++j) {
      s.tasks.push_back(task(random_penalty(rng), weight(rng), width(rng)));
      total_width += s.tasks.back().channel_width;
    }
    c.sources.push_back(std::move(s));
  }
  c.num_channels = std::uniform_int_distribution<std::int64_t>(0, total_width)(rng);
  return c;
}

// Minimum over all 2^h action sequences of sum_s g^s (w p(min(d, cap)) + a price).
inline double per_task_brute_force(const SystemConfig& c, TaskId id, double price, std::int64_t h, Aoi start) {
  const auto& t = c.task(id);
  double best = INFINITY;
  for (std::uint32_t mask = 0; mask < (1u << h); ++mask) {
    double cost = 0.0, disc = 1.0;
    Aoi d = start;
    for (std::int64_t s = 0; s < h; ++s) {
      const bool a = (mask >> s) & 1u;
      cost += disc * (t.weight * penalty_eval(t.penalty, std::min<Aoi>(d, c.aoi_cap)) + (a ? price : 0.0));
      d = a ? 1 : d + 1;
      disc *= c.discount;
    }
    best = std::min(best, cost);
  }
  return best;
}

}  // namespace mtri::testing
