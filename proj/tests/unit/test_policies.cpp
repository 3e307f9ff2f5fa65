#include <gtest/gtest.h>

#include <random>
#include <set>

#include "ermab/domains.hpp"
#include "ermab/errors.hpp"
#include "ermab/policies.hpp"
#include "ermab/rng.hpp"

using namespace ermab;

namespace {

// Five two-state arms; state 1 is the high-risk state.
GroupedInstance flagged_instance(int budget, std::vector<std::size_t> groups = {0, 0, 0, 0, 0}) {
  GroupedInstance inst;
  const ArmModel arm = two_state_arm({{{0.5, 0.5}, {0.5, 0.5}}}, 0);
  for (std::size_t g : groups) {
    inst.arms.push_back(arm);
    inst.arms.back().set_group_id(g);
    inst.group_of.push_back(g);
  }
  inst.n_groups = *std::max_element(groups.begin(), groups.end()) + 1;
  inst.horizon = 10;
  inst.total_budget = budget;
  inst.start_states.assign(groups.size(), 0);
  inst.annotations = StateAnnotations{{false, true}, {false, false}, {1.0, 1.0}, {1.0, 0.0}};
  return inst;
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no ermab::Error thrown";
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST(PolicyNames, RoundTrip) {
  for (PolicyKind k : all_policy_kinds()) EXPECT_EQ(parse_policy_kind(to_string(k)), k);
  EXPECT_EQ(parse_policy_kind("mnw-eg"), PolicyKind::MNWEG);
  EXPECT_FALSE(parse_policy_kind("greedy").has_value());
}

TEST(TopByScore, TiesGoToLowerIndex) {
  const std::vector<std::size_t> cand{0, 1, 2, 3};
  const std::vector<double> scores{0.2, 0.7, 0.7, 0.7};
  EXPECT_EQ(top_by_score(cand, scores, 2), (std::vector<std::size_t>{1, 2}));
}

TEST(SelectActions, NoActActsOnNothing) {
  const auto inst = flagged_instance(2);
  const std::vector<std::size_t> states{1, 1, 0, 1, 0};
  RoundContext round{&inst, states};
  EXPECT_TRUE(select_actions({PolicyKind::NoAct}, round).acted.empty());
}

TEST(SelectActions, OptTakesGlobalTopB) {
  auto inst = flagged_instance(2, {0, 0, 0});
  const std::vector<std::size_t> states{0, 0, 0};
  const std::vector<double> idx{0.9, 0.1, 0.5};
  RoundContext round{&inst, states, 0, idx};
  EXPECT_EQ(select_actions({PolicyKind::Opt}, round).acted, (std::vector<std::size_t>{0, 2}));
}

TEST(SelectActions, GroupPoliciesRespectGroupBudgets) {
  const auto inst = flagged_instance(2, {0, 0, 1, 1, 1});
  const std::vector<std::size_t> states(5, 0);
  const std::vector<double> idx{0.9, 0.8, 0.7, 0.1, 0.2};
  AllocationResult alloc;
  alloc.budgets = {1, 1};
  RoundContext round{&inst, states, 0, idx, &alloc};
  for (PolicyKind k : {PolicyKind::MMR, PolicyKind::MNW, PolicyKind::MNWEG}) {
    const auto a = select_actions({k}, round);
    EXPECT_EQ(a.acted, (std::vector<std::size_t>{0, 2}));
    EXPECT_NO_THROW(check_feasible(inst, a, &alloc));
  }
}

TEST(SelectActions, GroupPolicyWithoutAllocationFails) {
  const auto inst = flagged_instance(2);
  const std::vector<std::size_t> states(5, 0);
  const std::vector<double> idx(5, 0.1);
  RoundContext round{&inst, states, 0, idx};
  EXPECT_EQ(kind_of([&] { select_actions({PolicyKind::MMR}, round); }),
            ErrorKind::MissingAllocation);
}

TEST(SelectActions, RoundRobinPrefersLeastRecentHighRisk) {
  const auto inst = flagged_instance(2);
  const std::vector<std::size_t> states{0, 1, 0, 1, 1};
  const ActHistory last{std::nullopt, std::nullopt, std::nullopt, 2, 0};
  RoundContext round{&inst, states, 3, {}, nullptr, last};
  EXPECT_EQ(select_actions({PolicyKind::HRRR}, round).acted, (std::vector<std::size_t>{1, 4}));
}

TEST(SelectActions, RoundRobinFillsFromLowRisk) {
  const auto inst = flagged_instance(3);
  const std::vector<std::size_t> states{0, 0, 1, 0, 0};
  const ActHistory last{1, 0, 2, std::nullopt, 1};
  RoundContext round{&inst, states, 3, {}, nullptr, last};
  EXPECT_EQ(select_actions({PolicyKind::HRRR}, round).acted, (std::vector<std::size_t>{1, 2, 3}));
}

TEST(SelectActions, RoundRobinSkipsDropout) {
  auto inst = flagged_instance(2);
  inst.annotations->dropout = {true, false};
  const std::vector<std::size_t> states{0, 1, 0, 0, 0};
  const ActHistory last(5);
  RoundContext round{&inst, states, 0, {}, nullptr, last};
  EXPECT_EQ(select_actions({PolicyKind::HRRR}, round).acted, (std::vector<std::size_t>{1}));
}

TEST(SelectActions, RandomHighRiskStaysInHighRiskWhenEnough) {
  const auto inst = flagged_instance(2);
  const std::vector<std::size_t> states{1, 0, 1, 1, 0};
  std::mt19937_64 rng(3);
  RoundContext round{&inst, states, 0, {}, nullptr, {}, &rng};
  for (int i = 0; i < 50; ++i) {
    const auto a = select_actions({PolicyKind::HRRand}, round);
    ASSERT_EQ(a.acted.size(), 2u);
    for (std::size_t n : a.acted) EXPECT_EQ(states[n], 1u);
  }
}

TEST(SelectActions, HeuristicsNeedClinicalFlag) {
  auto inst = flagged_instance(2);
  inst.annotations.reset();
  const std::vector<std::size_t> states(5, 0);
  const ActHistory last(5);
  std::mt19937_64 rng(5);
  RoundContext round{&inst, states, 0, {}, nullptr, last, &rng};
  EXPECT_EQ(kind_of([&] { select_actions({PolicyKind::HRRR}, round); }),
            ErrorKind::DomainLacksClinicalFlag);
  EXPECT_EQ(kind_of([&] { select_actions({PolicyKind::HRRand}, round); }),
            ErrorKind::DomainLacksClinicalFlag);
}

TEST(SelectActions, RandomIsUniformWithoutReplacement) {
  const auto inst = flagged_instance(2);
  const std::vector<std::size_t> states(5, 0);
  std::mt19937_64 rng(7);
  RoundContext round{&inst, states, 0, {}, nullptr, {}, &rng};
  std::vector<int> hits(5, 0);
  for (int i = 0; i < 5000; ++i) {
    const auto a = select_actions({PolicyKind::Random}, round);
    ASSERT_EQ(std::set<std::size_t>(a.acted.begin(), a.acted.end()).size(), 2u);
    for (std::size_t n : a.acted) ++hits[n];
  }
  for (int h : hits) EXPECT_NEAR(h / 5000.0, 0.4, 0.03);
}

TEST(CheckFeasible, RejectsOverspend) {
  const auto inst = flagged_instance(2, {0, 0, 1, 1, 1});
  EXPECT_THROW(check_feasible(inst, {{0, 1, 2}}, nullptr), Error);
  AllocationResult alloc;
  alloc.budgets = {1, 1};
  EXPECT_THROW(check_feasible(inst, {{0, 1}}, &alloc), Error);
  EXPECT_NO_THROW(check_feasible(inst, {{0, 3}}, &alloc));
}

TEST(PlanAllocation, ConservesBudgetOnSynthetic) {
  const auto inst = build_synthetic({});
  std::vector<std::uint64_t> keys;
  for (const auto& a : inst.arms) keys.push_back(a.fingerprint());
  SolverCache cache;
  std::vector<double> idx;
  for (std::size_t n = 0; n < inst.n_arms(); ++n)
    idx.push_back(cache.index(inst.arms[n], keys[n], inst.start_states[n], inst.horizon));
  for (PolicyKind k : {PolicyKind::MMR, PolicyKind::MNW, PolicyKind::MNWEG}) {
    auto rng = make_stream(1, StreamPurpose::Upsample);
    const auto r = plan_allocation(k, inst, inst.start_states, inst.horizon, idx, keys,
                                   ChargeRule::Envelope, rng);
    int sum = 0;
    const auto sizes = inst.group_sizes();
    for (std::size_t g = 0; g < r.budgets.size(); ++g) {
      EXPECT_LE(r.budgets[g], sizes[g]);
      sum += r.budgets[g];
    }
    EXPECT_EQ(sum, inst.total_budget);
  }
}
