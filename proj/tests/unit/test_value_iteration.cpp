#include <gtest/gtest.h>

#include <random>

#include "ermab/domains.hpp"
#include "ermab/value_iteration.hpp"
#include "support/random_models.hpp"

using namespace ermab;

namespace {

const ArmModel kGroupA = two_state_arm({{{0.05, 0.99}, {0.35, 0.99}}}, 0);

}  // namespace

TEST(ValueIteration, LastRoundIsPureReward) {
  std::mt19937_64 rng(7);
  ArmModel arm = fixtures::random_arm(2, rng);
  arm = ArmModel(2, {arm.transitions().begin(), arm.transitions().end()}, {0.0, 1.0});
  const auto v = charged_values(arm, 1, 0.0);
  EXPECT_DOUBLE_EQ(v[0], 0.0);
  EXPECT_DOUBLE_EQ(v[1], 1.0);
}

TEST(ValueIteration, TwoRoundGroupAFromZero) {
  // 0 now, then acting lands in state 1 with probability 0.99.
  const auto table = charged_value_iteration(kGroupA, 0, 2, 0.0);
  EXPECT_NEAR(table.value(0, 0), 0.99, 1e-12);
  EXPECT_EQ(table.action(0, 0), 1);
}

TEST(ValueIteration, UselessActionNeverTaken) {
  const ArmModel inert = two_state_arm({{{0.3, 0.3}, {0.6, 0.6}}}, 0);
  const auto charged = charged_value_iteration(inert, 0, 6, 0.5);
  const auto passive = charged_value_iteration(inert, 0, 6, 0.0);
  for (int k = 0; k <= 6; ++k)
    for (std::size_t s = 0; s < 2; ++s) {
      EXPECT_EQ(charged.action(k, s), 0);
      EXPECT_EQ(charged.value(k, s), passive.value(k, s));
    }
}

TEST(ValueIteration, ZeroChargeTieGoesPassive) {
  const ArmModel inert = two_state_arm({{{0.3, 0.3}, {0.6, 0.6}}}, 0);
  const auto table = charged_value_iteration(inert, 0, 4, 0.0);
  for (int k = 0; k < 4; ++k) EXPECT_EQ(table.action(k, 0), 0);
}

TEST(ValueIteration, TerminalRowIsZero) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const ArmModel arm = fixtures::random_arm(3, rng);
    const auto table = charged_value_iteration(arm, 2, 7, 0.3);
    for (std::size_t s = 0; s < 3; ++s) EXPECT_EQ(table.value(7, s), 0.0);
  }
}

TEST(ValueIteration, NonIncreasingInCharge) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> lam(-0.5, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    const ArmModel arm = fixtures::random_arm(3, rng);
    double l1 = lam(rng), l2 = lam(rng);
    if (l1 > l2) std::swap(l1, l2);
    const auto lo = charged_value_iteration(arm, 0, 5, l1);
    const auto hi = charged_value_iteration(arm, 0, 5, l2);
    for (int k = 0; k <= 5; ++k)
      for (std::size_t s = 0; s < 3; ++s) EXPECT_GE(lo.value(k, s), hi.value(k, s) - 1e-12);
  }
}

TEST(ValueIteration, BitIdenticalOnRepeat) {
  std::mt19937_64 rng(17);
  const ArmModel arm = fixtures::random_arm(4, rng);
  const auto a = charged_value_iteration(arm, 0, 9, 0.21);
  const auto b = charged_value_iteration(arm, 0, 9, 0.21);
  for (int k = 0; k <= 9; ++k)
    for (std::size_t s = 0; s < 4; ++s) {
      EXPECT_EQ(a.value(k, s), b.value(k, s));
      EXPECT_EQ(a.action(k, s), b.action(k, s));
    }
}

TEST(ValueIteration, StartTimeOnlyShiftsRows) {
  std::mt19937_64 rng(19);
  const ArmModel arm = fixtures::random_arm(3, rng);
  const auto full = charged_value_iteration(arm, 0, 8, 0.1);
  const auto tail = charged_value_iteration(arm, 5, 8, 0.1);
  for (int k = 5; k <= 8; ++k)
    for (std::size_t s = 0; s < 3; ++s) EXPECT_EQ(full.value(k, s), tail.value(k, s));
}

TEST(ValueIteration, AdvantageMatchesTableChoice) {
  std::mt19937_64 rng(23);
  const ArmModel arm = fixtures::random_arm(3, rng);
  const auto table = charged_value_iteration(arm, 0, 4, 0.2);
  for (std::size_t s = 0; s < 3; ++s) {
    const double adv = action_advantage(arm, s, 4, 0.2);
    EXPECT_EQ(table.action(0, s), adv > kTieTolerance ? 1 : 0);
  }
}
