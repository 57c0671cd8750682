#include <gtest/gtest.h>

#include <random>
#include <set>

#include "fixtures.hpp"
#include "mtri/policies.hpp"
#include "mtri/sim.hpp"

using namespace mtri;
using mtri::testing::one_source;
using mtri::testing::task;

namespace {

// Best total gain over all feasible action sets restricted to positive gains.
double best_feasible_gain(const SystemConfig& c, const std::vector<double>& gains) {
  const std::size_t k = c.num_tasks();
  double best = 0.0;
  for (std::uint32_t mask = 0; mask < (1u << k); ++mask) {
    ActionMatrix a{std::vector<std::uint8_t>(k, 0), 0};
    double g = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      a.actions[i] = (mask >> i) & 1u;
      if (a.actions[i]) g += gains[i];
    }
    if (is_feasible(c, a)) best = std::max(best, g);
  }
  return best;
}

}  // namespace

TEST(MgfSelect, BudgetExhaustsOnHighestGain) {
  const auto c = one_source({task(LinearPenalty{1.0}), task(LinearPenalty{1.0}), task(LinearPenalty{1.0})}, 1, 1);
  const auto [a, rejected] = mgf_select(c, {0.5, 0.2, -0.1}, 0);
  EXPECT_EQ(a.actions, (std::vector<std::uint8_t>{1, 0, 0}));
  EXPECT_EQ(rejected, 1);
}

TEST(MgfSelect, NonPositiveGainsScheduleNothing) {
  const auto c = one_source({task(LinearPenalty{1.0}), task(LinearPenalty{1.0})}, 2, 2);
  const auto [a, rejected] = mgf_select(c, {0.0, -3.0}, 0);
  EXPECT_EQ(a.actions, (std::vector<std::uint8_t>{0, 0}));
  EXPECT_EQ(rejected, 0);
}

TEST(MgfSelect, WideTaskBlocksNarrowOne) {
  SystemConfig c;
  c.num_sources = 2;
  c.num_channels = 3;
  c.sources.push_back({1, {task(LinearPenalty{1.0}, 1.0, 3)}});
  c.sources.push_back({1, {task(LinearPenalty{1.0}, 1.0, 1)}});
  const std::vector<double> gains{0.9, 0.8};
  const auto [a, rejected] = mgf_select(c, gains, 0);
  EXPECT_EQ(a.actions, (std::vector<std::uint8_t>{1, 0}));
  EXPECT_EQ(resource_usage(c, a).channels, 3);
  EXPECT_EQ(rejected, 1);
  // Gain-greedy order, not the best packing: the exhaustive optimum is the same set here.
  EXPECT_DOUBLE_EQ(best_feasible_gain(c, gains), 0.9);
}

TEST(MgfSelect, RejectedTaskDoesNotStopTheScan) {
  SystemConfig c;
  c.num_sources = 1;
  c.num_channels = 3;
  c.sources.push_back({3, {task(LinearPenalty{1.0}, 1.0, 2), task(LinearPenalty{1.0}, 1.0, 2),
                           task(LinearPenalty{1.0}, 1.0, 1)}});
  const auto [a, rejected] = mgf_select(c, {0.9, 0.8, 0.1}, 0);
  EXPECT_EQ(a.actions, (std::vector<std::uint8_t>{1, 0, 1}));
  EXPECT_EQ(rejected, 1);
}

TEST(MgfSelect, EqualGainsInTaskOrder) {
  const auto c = one_source({task(LinearPenalty{1.0}), task(LinearPenalty{1.0}), task(LinearPenalty{1.0})}, 1, 1);
  EXPECT_EQ(mgf_select(c, {0.4, 0.4, 0.4}, 0).first.actions, (std::vector<std::uint8_t>{1, 0, 0}));
}

TEST(MgfDecide, AmpleBudgetsScheduleEveryPositiveGain) {
  const auto c = one_source({task(LinearPenalty{1.0}), task(ExponentialPenalty{0.5}), task(LogarithmicPenalty{2.0})},
                            3, 3, 0.9, 10, 20);
  const auto d = mgf_decide(c, AoIState{{2, 5, 3}}, 0, std::nullopt);
  EXPECT_EQ(d.divergence, 0);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(d.actions.actions[i], d.gains.gains[i] > 0.0 ? 1 : 0);
}

TEST(MgfDecide, NeverSchedulesNonPositiveGain) {
  std::mt19937_64 rng(29);
  for (int n = 0; n < 40; ++n) {
    const auto c = mtri::testing::random_config(rng, 3, 3, 8, 15);
    AoIState s{std::vector<Aoi>(c.num_tasks())};
    for (auto& a : s.aoi) a = std::uniform_int_distribution<Aoi>(1, 20)(rng);
    const auto d = mgf_decide(c, s, 2, std::nullopt);
    EXPECT_TRUE(is_feasible(c, d.actions));
    for (std::size_t i = 0; i < s.aoi.size(); ++i)
      if (d.actions.actions[i]) EXPECT_GT(d.gains.gains[i], 0.0);
  }
}

TEST(MgfDecide, ReusesCachedPricesBetweenReoptimizations) {
  const auto c = one_source({task(LinearPenalty{1.0}), task(LinearPenalty{2.0})}, 1, 1, 0.9, 10, 20);
  const MultiplierSet cached{{0.3}, 0.2};
  MgfPolicy p;
  p.reoptimize_every = 4;
  EXPECT_EQ(mgf_decide(c, initial_state(c), 3, cached, p).dual.multipliers, cached);
  EXPECT_NE(mgf_decide(c, initial_state(c), 4, cached, p).dual.multipliers, cached);
  EXPECT_THROW(mgf_decide(c, initial_state(c), 10, cached, p), std::invalid_argument);
}

TEST(Maf, Examples) {
  const auto c = one_source({task(LinearPenalty{1.0}), task(LinearPenalty{1.0}), task(LinearPenalty{1.0})}, 2, 2);
  EXPECT_EQ(maf_decide(c, AoIState{{5, 3, 9}}, 0).actions, (std::vector<std::uint8_t>{1, 0, 1}));
  EXPECT_EQ(maf_decide(c, AoIState{{4, 4, 4}}, 0).actions, (std::vector<std::uint8_t>{1, 1, 0}));
  auto none = c;
  none.num_channels = 0;
  EXPECT_EQ(maf_decide(none, AoIState{{5, 3, 9}}, 0).actions, (std::vector<std::uint8_t>{0, 0, 0}));
}

TEST(Random, AmpleBudgetsScheduleEverything) {
  const auto c = one_source({task(LinearPenalty{1.0}), task(LinearPenalty{1.0}), task(LinearPenalty{1.0})}, 3, 3);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    EXPECT_EQ(random_decide(c, initial_state(c), 0, rng).actions, (std::vector<std::uint8_t>{1, 1, 1}));
  }
}

TEST(Random, DeterministicForSeed) {
  const auto c = one_source({task(LinearPenalty{1.0}), task(LinearPenalty{1.0}), task(LinearPenalty{1.0})}, 1, 1);
  std::mt19937_64 a(42), b(42);
  EXPECT_EQ(random_decide(c, initial_state(c), 0, a), random_decide(c, initial_state(c), 0, b));
}

TEST(Random, UniformOverTasksWithOneChannel) {
  std::vector<TaskConfig> tasks(5, task(LinearPenalty{1.0}));
  const auto c = one_source(tasks, 5, 1);
  std::vector<int> counts(5, 0);
  const int n = 10000;
  for (int seed = 0; seed < n; ++seed) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
    const auto a = random_decide(c, initial_state(c), 0, rng);
    int scheduled = 0;
    for (std::size_t i = 0; i < 5; ++i)
      if (a.actions[i]) {
        ++counts[i];
        ++scheduled;
      }
    ASSERT_EQ(scheduled, 1);
  }
  double chi2 = 0.0;
  for (int x : counts) chi2 += (x - n / 5.0) * (x - n / 5.0) / (n / 5.0);
  EXPECT_LT(chi2, 13.277);  // chi-square, 4 dof, p = 0.01
}

TEST(Feasibility, EveryPolicyEverySlot) {
  std::mt19937_64 rng(31);
  for (int n = 0; n < 50; ++n) {
    const auto c = mtri::testing::random_config(rng, 4, 4, 12, 16);
    for (const PolicyKind& p : {PolicyKind{MgfPolicy{}}, PolicyKind{MafPolicy{}}, PolicyKind{RandomPolicy{5}}}) {
      const auto r = run(c, p);
      for (const auto& u : r.resource_usage) ASSERT_TRUE(is_feasible(c, u)) << policy_name(p);
    }
  }
}
