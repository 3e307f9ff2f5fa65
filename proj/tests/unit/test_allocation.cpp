#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include "ermab/allocation.hpp"
#include "ermab/errors.hpp"
#include "support/random_models.hpp"

using namespace ermab;

namespace {

FunctionOracle toy_oracle() {
  return FunctionOracle([](std::size_t g, int b) { return g == 0 ? 2.0 * b + 1 : 4.0 * (b + 1); });
}

// Every split of `total` with 0 <= b_g <= caps[g].
void for_each_split(std::span<const int> caps, int total, auto&& visit) {
  std::vector<int> b(caps.size(), 0);
  auto rec = [&](auto&& self, std::size_t g, int left) -> void {
    if (g + 1 == caps.size()) {
      if (left > caps[g]) return;
      b[g] = left;
      visit(b);
      return;
    }
    for (int x = 0; x <= std::min(left, caps[g]); ++x) {
      b[g] = x;
      self(self, g + 1, left - x);
    }
  };
  rec(rec, 0, total);
}

}  // namespace

TEST(AllocateMmr, ToyOracleFillsWorstGroup) {
  auto oracle = toy_oracle();
  const std::vector<int> sizes{2, 2};
  const auto r = allocate_mmr(sizes, 2, oracle);
  EXPECT_EQ(r.budgets, (std::vector<int>{2, 0}));
  EXPECT_EQ(r.final_values, (std::vector<double>{5.0, 4.0}));
  ASSERT_EQ(r.objective_trace.size(), 2u);
  EXPECT_EQ(r.objective_trace[0].group, 0u);
}

TEST(AllocateMnw, ToyOracleSplitsEvenly) {
  auto oracle = toy_oracle();
  const std::vector<int> caps{2, 2};
  const auto r = allocate_mnw(caps, 2, oracle);
  EXPECT_EQ(r.budgets, (std::vector<int>{1, 1}));
  EXPECT_EQ(r.final_values, (std::vector<double>{3.0, 8.0}));
}

TEST(AllocateMmr, IdenticalGroupsTieToLowerIndex) {
  FunctionOracle oracle([](std::size_t, int b) { return 1.0 + b; });
  const std::vector<int> sizes{3, 3};
  EXPECT_EQ(allocate_mmr(sizes, 2, oracle).budgets, (std::vector<int>{1, 1}));
}

TEST(AllocateMmr, ConstantValuesNeverReorder) {
  FunctionOracle oracle([](std::size_t g, int) { return 1.0 + static_cast<double>(g); });
  const std::vector<int> sizes{3, 3, 3};
  EXPECT_EQ(allocate_mmr(sizes, 3, oracle).budgets, (std::vector<int>{3, 0, 0}));
}

TEST(AllocateMmr, UsesSizeNormalizedValues) {
  // Group 1 has the smaller raw value but the larger per-arm value.
  FunctionOracle oracle([](std::size_t g, int b) { return g == 0 ? 10.0 + b : 3.0 + b; });
  const std::vector<int> sizes{10, 1};
  EXPECT_EQ(allocate_mmr(sizes, 1, oracle).budgets, (std::vector<int>{1, 0}));
}

TEST(AllocateMnw, IdenticalGroupsSplitEvenly) {
  FunctionOracle oracle([](std::size_t, int b) { return std::sqrt(1.0 + b); });
  const std::vector<int> caps{4, 4};
  EXPECT_EQ(allocate_mnw(caps, 4, oracle).budgets, (std::vector<int>{2, 2}));
}

TEST(AllocateMnw, ZeroBudgetTakesNoSteps) {
  auto oracle = toy_oracle();
  const std::vector<int> caps{2, 2};
  const auto r = allocate_mnw(caps, 0, oracle);
  EXPECT_EQ(r.budgets, (std::vector<int>{0, 0}));
  EXPECT_TRUE(r.objective_trace.empty());
}

TEST(AllocateMnw, CapRemovesGroup) {
  FunctionOracle oracle([](std::size_t g, int b) { return g == 0 ? 1.0 + 10.0 * b : 1.0 + b; });
  const std::vector<int> caps{1, 5};
  EXPECT_EQ(allocate_mnw(caps, 4, oracle).budgets, (std::vector<int>{1, 3}));
}

TEST(AllocateMnw, ZeroValueIsFlooredNegativeIsRejected) {
  FunctionOracle zero([](std::size_t g, int b) { return g == 0 ? 0.0 : 1.0 + b; });
  const std::vector<int> caps{2, 2};
  EXPECT_NO_THROW(allocate_mnw(caps, 2, zero));
  FunctionOracle negative([](std::size_t, int) { return -1.0; });
  try {
    allocate_mnw(caps, 1, negative);
    FAIL() << "expected NonPositiveValue";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonPositiveValue);
  }
}

TEST(Allocators, BudgetAboveArmsRejected) {
  auto oracle = toy_oracle();
  const std::vector<int> sizes{1, 1};
  EXPECT_THROW(allocate_mmr(sizes, 3, oracle), Error);
  EXPECT_THROW(allocate_mnw(sizes, 3, oracle), Error);
}

TEST(Allocators, OracleEvaluationsAreMemoized) {
  int calls = 0;
  FunctionOracle oracle([&](std::size_t, int b) {
    ++calls;
    return 1.0 + b;
  });
  EXPECT_EQ(oracle.value(0, 2), 3.0);
  EXPECT_EQ(oracle.value(0, 2), 3.0);
  EXPECT_EQ(calls, 1);
}

TEST(Allocators, MatchExhaustiveOptimum) {
  std::mt19937_64 rng(73);
  std::uniform_int_distribution<int> n_groups(1, 3), size(1, 4), budget(0, 6);
  for (int trial = 0; trial < 300; ++trial) {
    const int g = n_groups(rng);
    std::vector<int> sizes(g);
    for (int& s : sizes) s = size(rng);
    const int cap = std::accumulate(sizes.begin(), sizes.end(), 0);
    const int B = std::min(budget(rng), cap);
    std::vector<std::vector<double>> tables;
    for (int i = 0; i < g; ++i) tables.push_back(fixtures::concave_table(sizes[i], rng));
    auto fn = [&](std::size_t i, int b) { return tables[i][b]; };

    double best_min = -std::numeric_limits<double>::infinity();
    double best_log = -std::numeric_limits<double>::infinity();
    for_each_split(sizes, B, [&](const std::vector<int>& b) {
      double mn = std::numeric_limits<double>::infinity(), lg = 0.0;
      for (int i = 0; i < g; ++i) {
        mn = std::min(mn, tables[i][b[i]] / sizes[i]);
        lg += std::log(tables[i][b[i]]);
      }
      best_min = std::max(best_min, mn);
      best_log = std::max(best_log, lg);
    });

    FunctionOracle o1(fn), o2(fn);
    const auto mmr = allocate_mmr(sizes, B, o1);
    const auto mnw = allocate_mnw(sizes, B, o2);
    double mn = std::numeric_limits<double>::infinity(), lg = 0.0;
    for (int i = 0; i < g; ++i) {
      mn = std::min(mn, mmr.final_values[i] / sizes[i]);
      lg += std::log(mnw.final_values[i]);
    }
    EXPECT_NEAR(mn, best_min, 1e-9);
    EXPECT_NEAR(lg, best_log, 1e-9);
    EXPECT_EQ(std::accumulate(mmr.budgets.begin(), mmr.budgets.end(), 0), B);
    EXPECT_EQ(std::accumulate(mnw.budgets.begin(), mnw.budgets.end(), 0), B);
  }
}

TEST(AllocateMnw, ScaleInvariant) {
  std::mt19937_64 rng(79);
  std::uniform_real_distribution<double> scale(0.01, 100.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::vector<int> caps{5, 5, 5};
    std::vector<std::vector<double>> tables;
    for (int i = 0; i < 3; ++i) tables.push_back(fixtures::concave_table(5, rng));
    const double c = scale(rng);
    FunctionOracle plain([&](std::size_t i, int b) { return tables[i][b]; });
    FunctionOracle scaled([&](std::size_t i, int b) { return c * tables[i][b]; });
    EXPECT_EQ(allocate_mnw(caps, 7, plain).budgets, allocate_mnw(caps, 7, scaled).budgets);
  }
}

TEST(Rescale, WeightsFollowOriginalSizes) {
  // Weights b * |g| / theta = (2, 2): an even split before caps.
  const std::vector<double> w{4.0 * 2 / 4, 2.0 * 4 / 4};
  const std::vector<int> loose{6, 6};
  EXPECT_EQ(apportion(w, loose, 6), (std::vector<int>{3, 3}));
}

TEST(Rescale, GroupSizeCapBinds) {
  // The size-2 group cannot take 3 units; the surplus moves to the other group.
  const std::vector<int> up{4, 2}, sizes{2, 4};
  EXPECT_EQ(rescale(up, sizes, 4, 6), (std::vector<int>{2, 4}));
}

TEST(Rescale, FullSizeGroupsUnchanged) {
  const std::vector<int> up{3, 1, 2}, sizes{4, 4, 4};
  EXPECT_EQ(rescale(up, sizes, 4, 6), up);
}

TEST(Apportion, ZeroWeightsFallBackToUniform) {
  const std::vector<double> w{0.0, 0.0};
  const std::vector<int> caps{5, 5};
  EXPECT_EQ(apportion(w, caps, 2), (std::vector<int>{1, 1}));
}

TEST(Apportion, LargestRemainderWins) {
  const std::vector<double> w{0.45, 0.35, 0.20};
  const std::vector<int> caps{9, 9, 9};
  EXPECT_EQ(apportion(w, caps, 3), (std::vector<int>{1, 1, 1}));
  EXPECT_EQ(apportion(w, caps, 4), (std::vector<int>{2, 1, 1}));
}

TEST(Apportion, RespectsCapsAndConserves) {
  std::mt19937_64 rng(83);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> cap(1, 6);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> w(4);
    std::vector<int> caps(4);
    for (double& x : w) x = unit(rng);
    for (int& c : caps) c = cap(rng);
    const int total = std::accumulate(caps.begin(), caps.end(), 0) / 2;
    const auto out = apportion(w, caps, total);
    EXPECT_EQ(std::accumulate(out.begin(), out.end(), 0), total);
    for (std::size_t g = 0; g < 4; ++g) {
      EXPECT_GE(out[g], 0);
      EXPECT_LE(out[g], caps[g]);
    }
  }
}

TEST(AllocateMnwEqualized, SmallGroupBudgetShrinks) {
  // Group value grows with member count: sqrt-like in budget, linear in size.
  const std::vector<int> sizes{2, 8};
  FunctionOracle naive([&](std::size_t g, int b) { return sizes[g] + std::sqrt(b); });
  FunctionOracle upsampled([&](std::size_t, int b) { return 8.0 + std::sqrt(b); });
  const auto a = allocate_mnw(sizes, 5, naive);
  const auto e = allocate_mnw_equalized(sizes, 8, 5, upsampled);
  EXPECT_GT(a.budgets[0], e.budgets[0]);
  EXPECT_EQ(e.budgets[0] + e.budgets[1], 5);
}

TEST(Upsample, TargetEqualToSizeIsIdentity) {
  std::mt19937_64 rng(89);
  const std::vector<int> group{7, 8, 9};
  EXPECT_EQ(upsample<int>(group, 3, rng), group);
}

TEST(Upsample, AddedMembersCopyOriginals) {
  std::mt19937_64 rng(97);
  const std::vector<int> group{10, 20};
  const auto out = upsample<int>(group, 4, rng);
  ASSERT_EQ(out.size(), 4u);
  EXPECT_EQ(out[0], 10);
  EXPECT_EQ(out[1], 20);
  for (int x : out) EXPECT_TRUE(x == 10 || x == 20);
}

TEST(Upsample, SingletonDuplicates) {
  std::mt19937_64 rng(101);
  const std::vector<int> group{5};
  EXPECT_EQ(upsample<int>(group, 3, rng), (std::vector<int>{5, 5, 5}));
}

TEST(ConjectureGap, RelativeDeviation) {
  EXPECT_DOUBLE_EQ(conjecture_gap(2.0, 4.0, 2.0), 0.0);
  EXPECT_DOUBLE_EQ(conjecture_gap(2.0, 3.0, 2.0), 0.25);
  EXPECT_DOUBLE_EQ(conjecture_gap(0.0, 0.0, 3.0), 0.0);
}
