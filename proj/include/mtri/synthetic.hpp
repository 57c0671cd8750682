#pragma once

// The synthetic benchmark family: per source, tasks cycle through the penalty
// curves d, exp(0.5 d), 10 ln d by j mod 3, and the first ceil(K/2) tasks in
// (m, j) order get the low weight.

#include <cstdint>

#include "mtri/model.hpp"

namespace mtri {

struct SyntheticParams {
  std::int64_t num_sources = 20;
  std::int64_t tasks_per_source = 3;
  std::int64_t num_channels = 10;
  std::int64_t compute_budget = 2;
  std::int64_t channel_width = 1;
  double discount = 0.9;
  std::int64_t horizon = 100;
  std::int64_t aoi_cap = 200;
  double low_weight = 0.01;
  double high_weight = 1.0;
};

inline PenaltyFunction synthetic_penalty(std::size_t task_index) {
  switch (task_index % 3) {
    case 0: return LinearPenalty{1.0};
    case 1: return ExponentialPenalty{0.5};
    default: return LogarithmicPenalty{10.0};
  }
}

inline SystemConfig synthetic_instance(const SyntheticParams& p = {}) {
  SystemConfig c;
  c.num_sources = p.num_sources;
  c.num_channels = p.num_channels;
  c.discount = p.discount;
  c.horizon = p.horizon;
  c.aoi_cap = p.aoi_cap;
  const auto total = p.num_sources * p.tasks_per_source;
  const auto low_count = (total + 1) / 2;
  std::int64_t rank = 0;
  for (std::int64_t m = 0; m < p.num_sources; ++m) {
    SourceConfig s;
    s.compute_budget = p.compute_budget;
    for (std::int64_t j = 0; j < p.tasks_per_source; ++j, ++rank) {
      TaskConfig t;
      t.channel_width = p.channel_width;
      t.weight = rank < low_count ? p.low_weight : p.high_weight;
      t.penalty = synthetic_penalty(static_cast<std::size_t>(j));
      s.tasks.push_back(std::move(t));
    }
    c.sources.push_back(std::move(s));
  }
  return c;
}

}  // namespace mtri
