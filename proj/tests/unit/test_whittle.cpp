#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "ermab/domains.hpp"
#include "ermab/joint_oracle.hpp"
#include "ermab/value_iteration.hpp"
#include "ermab/whittle.hpp"
#include "support/random_models.hpp"

using namespace ermab;

namespace {

constexpr double kGamma = kDefaultPrecision;
const ArmModel kA = two_state_arm({{{0.05, 0.99}, {0.35, 0.99}}}, 0);
const ArmModel kB = two_state_arm({{{0.05, 0.95}, {0.10, 0.95}}}, 0);
const ArmModel kC = two_state_arm({{{0.05, 0.90}, {0.05, 0.90}}}, 0);

struct Group {
  std::vector<ArmModel> arms;
  std::vector<const ArmModel*> ptrs;
  std::vector<std::uint64_t> keys;
  std::vector<std::size_t> states;
  std::vector<double> indexes;

  Group(std::vector<ArmModel> a, std::vector<std::size_t> s, int h)
      : arms(std::move(a)), states(std::move(s)) {
    for (const auto& arm : arms) {
      ptrs.push_back(&arm);
      keys.push_back(arm.fingerprint());
    }
    for (std::size_t n = 0; n < arms.size(); ++n)
      indexes.push_back(whittle_index(arms[n], states[n], h));
  }
  LagrangeBoundTable table(int h) const { return {ptrs, keys, states, h, indexes}; }
};

}  // namespace

TEST(WhittleIndex, InertArmIndexIsZero) {
  const ArmModel inert = two_state_arm({{{0.3, 0.3}, {0.6, 0.6}}}, 0);
  for (std::size_t s = 0; s < 2; ++s) EXPECT_NEAR(whittle_index(inert, s, 5), 0.0, 2 * kGamma);
}

TEST(WhittleIndex, LastRoundIndexIsZero) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 30; ++trial) {
    const ArmModel arm = fixtures::random_arm(3, rng);
    for (std::size_t s = 0; s < 3; ++s) EXPECT_NEAR(whittle_index(arm, s, 1), 0.0, 2 * kGamma);
  }
}

TEST(WhittleIndex, GroupATwoRoundsClosedForm) {
  // With lambda >= 0 the last layer is pure reward, so acting at s=0 is worth
  // p(0,1,1) - p(0,0,1) - lambda.
  EXPECT_NEAR(whittle_index(kA, 0, 2), 0.99 - 0.05, 2 * kGamma);
  EXPECT_NEAR(whittle_index(kA, 1, 2), 0.99 - 0.35, 2 * kGamma);
}

TEST(WhittleIndex, IndexEqualizesActions) {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 40; ++trial) {
    const ArmModel arm = fixtures::random_arm(3, rng);
    const double w = whittle_index(arm, 1, 4);
    if (!probe_indexability(arm, 1, 4)) continue;
    EXPECT_LE(action_advantage(arm, 1, 4, w + kGamma), 1e-9);
    EXPECT_GE(action_advantage(arm, 1, 4, w - kGamma), -1e-9);
  }
}

TEST(WhittleIndex, CacheAgreesWithDirectSearch) {
  SolverCache cache;
  for (std::size_t s = 0; s < 2; ++s)
    for (int h = 1; h <= 6; ++h) {
      EXPECT_EQ(cache.index(kB, kB.fingerprint(), s, h), whittle_index(kB, s, h));
      EXPECT_EQ(cache.index(kB, kB.fingerprint(), s, h), whittle_index(kB, s, h));
    }
}

TEST(LagrangeCharge, MidpointSeparatesTopB) {
  const std::vector<double> w{0.5, 0.3, 0.1};
  EXPECT_DOUBLE_EQ(lagrange_charge(w, 1, 3), 0.4);
  EXPECT_DOUBLE_EQ(lagrange_charge(w, 2, 3), 0.2);
  EXPECT_DOUBLE_EQ(lagrange_charge(w, 3, 3), 0.0);
}

TEST(LagrangeCharge, ZeroBudgetPricesOutEveryFutureAction) {
  EXPECT_DOUBLE_EQ(lagrange_charge(std::vector<double>{0.5, 0.3}, 0, 4), 5.0);
}

TEST(LagrangeCharge, ClampedAtZero) {
  EXPECT_DOUBLE_EQ(lagrange_charge(std::vector<double>{-0.2, -0.4, -0.6}, 1, 3), 0.0);
}

TEST(LagrangeCharge, TopBArmsNeverPricedOut) {
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> unit(0.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> w(6);
    for (double& x : w) x = unit(rng);
    std::vector<double> sorted = w;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    for (int b = 1; b < 6; ++b) {
      const double lam = lagrange_charge(w, b, 4);
      EXPECT_GE(sorted[b - 1], lam);
      EXPECT_LE(sorted[b], lam);
    }
  }
}

TEST(WhittleToLagrange, ThreeArmTrace) {
  // Value from an exact rational evaluation at lambda = 0.4, h = 3.
  const std::vector<ArmModel> arms{kA, kB, kC};
  const std::vector<std::size_t> states{0, 0, 0};
  const auto bound = whittle_to_lagrange(arms, states, 1, 3, {{0.5, 0.3, 0.1}, kGamma});
  EXPECT_DOUBLE_EQ(bound.lambda_star, 0.4);
  EXPECT_NEAR(bound.value, 112.0 / 25.0, 1e-12);
  EXPECT_EQ(bound.budget, 1);
}

TEST(WhittleToLagrange, ValueDecomposesExactly) {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<ArmModel> arms;
    std::vector<std::size_t> states;
    std::vector<double> w;
    for (int n = 0; n < 4; ++n) {
      arms.push_back(fixtures::random_arm(3, rng));
      states.push_back(static_cast<std::size_t>(n % 3));
      w.push_back(whittle_index(arms.back(), states.back(), 5));
    }
    for (int b = 0; b <= 4; ++b) {
      const auto g = whittle_to_lagrange(arms, states, b, 5, {w, kGamma});
      double sum = 0.0;
      for (double v : g.per_arm_values) sum += v;
      EXPECT_EQ(g.value, sum + b * 5 * g.lambda_star);
      EXPECT_GE(g.value, 0.0);
      EXPECT_GE(g.lambda_star, 0.0);
    }
  }
}

TEST(WhittleToLagrange, AllZeroIndexesChargeNothing) {
  const std::vector<ArmModel> arms{kA, kB};
  const std::vector<std::size_t> states{1, 0};
  const auto g = whittle_to_lagrange(arms, states, 1, 4, {{0.0, 0.0}, kGamma});
  EXPECT_EQ(g.lambda_star, 0.0);
  EXPECT_NEAR(g.value, charged_values(kA, 4, 0.0)[1] + charged_values(kB, 4, 0.0)[0], 1e-12);
}

TEST(WhittleToLagrange, FullBudgetIsUncoupledValue) {
  const std::vector<ArmModel> arms{kA, kB, kC};
  const std::vector<std::size_t> states{0, 1, 0};
  std::vector<double> w;
  for (std::size_t n = 0; n < 3; ++n) w.push_back(whittle_index(arms[n], states[n], 4));
  const auto g = whittle_to_lagrange(arms, states, 3, 4, {w, kGamma});
  double free = 0.0;
  for (std::size_t n = 0; n < 3; ++n) free += charged_values(arms[n], 4, 0.0)[states[n]];
  EXPECT_EQ(g.lambda_star, 0.0);
  EXPECT_NEAR(g.value, free, 1e-12);
}

TEST(LagrangeBoundTable, EnvelopeNeverAboveMidpoint) {
  std::mt19937_64 rng(59);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<ArmModel> arms;
    for (int n = 0; n < 5; ++n) arms.push_back(fixtures::random_arm(3, rng));
    const Group g(arms, {0, 1, 2, 0, 1}, 4);
    const auto t = g.table(4);
    for (int b = 0; b <= 5; ++b)
      EXPECT_LE(t.value(b, ChargeRule::Envelope), t.value(b, ChargeRule::Midpoint) + 1e-12);
  }
}

TEST(LagrangeBoundTable, MidpointMatchesWhittleToLagrange) {
  std::mt19937_64 rng(61);
  std::vector<ArmModel> arms;
  for (int n = 0; n < 4; ++n) arms.push_back(fixtures::random_arm(2, rng));
  const Group g(arms, {0, 1, 1, 0}, 5);
  const auto t = g.table(5);
  for (int b = 0; b <= 4; ++b) {
    const auto direct = whittle_to_lagrange(arms, g.states, b, 5, {g.indexes, kGamma});
    EXPECT_NEAR(t.value(b, ChargeRule::Midpoint), direct.value, 1e-12);
  }
}

TEST(LagrangeBoundTable, EnvelopeMonotoneAndConcave) {
  std::mt19937_64 rng(67);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<ArmModel> arms;
    std::vector<std::size_t> states;
    for (int n = 0; n < 6; ++n) {
      arms.push_back(fixtures::random_arm(3, rng));
      states.push_back(static_cast<std::size_t>(n % 3));
    }
    const Group g(arms, states, 5);
    const auto t = g.table(5);
    std::vector<double> l;
    for (int b = 0; b <= 6; ++b) l.push_back(t.value(b, ChargeRule::Envelope));
    for (int b = 1; b <= 6; ++b) EXPECT_GE(l[b], l[b - 1] - 1e-9);
    for (int b = 1; b < 6; ++b) EXPECT_LE(l[b + 1] - l[b], l[b] - l[b - 1] + 1e-9);
  }
}

TEST(LagrangeBoundTable, EnvelopeUpperBoundsExactValue) {
  // Any non-negative charge gives a valid relaxation, heterogeneous arms included.
  std::mt19937_64 rng(71);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<ArmModel> arms;
    for (int n = 0; n < 3; ++n) arms.push_back(fixtures::random_arm(2, rng));
    const std::vector<std::size_t> states{0, 1, 0};
    const Group g(arms, states, 4);
    const auto t = g.table(4);
    const auto inst = fixtures::single_group(arms, states, 4, 0);
    for (int b = 0; b <= 3; ++b)
      EXPECT_GE(t.value(b, ChargeRule::Envelope), exact_joint_value(inst, b) - 1e-9);
  }
}

TEST(LagrangeBoundTable, BoundCarriesChosenCharge) {
  const Group g({kA, kB, kC, kA}, {0, 0, 1, 1}, 4);
  const auto t = g.table(4);
  for (int b = 0; b <= 4; ++b) {
    const auto bound = t.bound(b, ChargeRule::Envelope);
    double sum = 0.0;
    for (double v : bound.per_arm_values) sum += v;
    EXPECT_NEAR(bound.value, t.value(b, ChargeRule::Envelope), 1e-12);
    EXPECT_NEAR(bound.value, sum + b * 4 * bound.lambda_star, 1e-12);
  }
}
