#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "ermab/domains.hpp"
#include "ermab/errors.hpp"
#include "ermab/simulation.hpp"

using namespace ermab;

namespace {

GroupedInstance small_synthetic(int budget = 4) {
  SyntheticSpec spec;
  spec.n_arms = 20;
  spec.budget = budget;
  spec.horizon = 8;
  return build_synthetic(spec);
}

GroupedInstance small_diabetes() {
  DiabetesSpec spec;
  spec.n_arms = 40;
  spec.budget = 6;
  spec.horizon = 6;
  return build_diabetes(spec);
}

}  // namespace

TEST(Gini, UnitValues) {
  EXPECT_NEAR(gini(std::vector<double>{3.0, 3.0, 3.0}), 0.0, 1e-12);
  EXPECT_NEAR(gini(std::vector<double>{0.0, 7.0}), 0.5, 1e-12);
  EXPECT_NEAR(gini(std::vector<double>{1.0, 2.0, 3.0}), 2.0 / 9.0, 1e-12);
}

TEST(Gini, AllZeroIsZero) { EXPECT_EQ(gini(std::vector<double>{0.0, 0.0}), 0.0); }

TEST(Gini, ScaleInvariant) {
  const std::vector<double> x{0.3, 1.7, 2.2, 0.0, 5.1};
  std::vector<double> y;
  for (double v : x) y.push_back(3.7 * v);
  EXPECT_NEAR(gini(x), gini(y), 1e-12);
}

TEST(Gini, RejectsBadInput) {
  EXPECT_THROW(gini(std::vector<double>{1.0, -1.0}), Error);
  EXPECT_THROW(gini(std::vector<double>{}), Error);
}

TEST(Aggregate, SingleRecordHasZeroStderr) {
  SimulationRecord r;
  r.per_group_total_reward = {4.0, 6.0};
  r.per_group_size = {2, 3};
  r.total_reward = 10.0;
  r.gini = 0.0;
  const auto s = aggregate(std::vector<SimulationRecord>{r});
  EXPECT_DOUBLE_EQ(s.mean_reward_per_arm, 2.0);
  EXPECT_EQ(s.stderr_reward_per_arm, 0.0);
  EXPECT_EQ(s.per_group_average, (std::vector<double>{2.0, 2.0}));
}

TEST(Aggregate, MeanGiniAndStderr) {
  SimulationRecord a, b;
  a.per_group_total_reward = b.per_group_total_reward = {1.0};
  a.per_group_size = b.per_group_size = {1};
  a.total_reward = 1.0;
  b.total_reward = 3.0;
  a.gini = 0.1;
  b.gini = 0.3;
  const auto s = aggregate(std::vector<SimulationRecord>{a, b});
  EXPECT_NEAR(s.mean_gini, 0.2, 1e-15);
  EXPECT_DOUBLE_EQ(s.mean_reward_per_arm, 2.0);
  // Sample std sqrt(2) over sqrt(2).
  EXPECT_NEAR(s.stderr_reward_per_arm, 1.0, 1e-12);
}

TEST(Aggregate, EmptyIsError) {
  EXPECT_THROW(aggregate(std::vector<SimulationRecord>{}), Error);
}

TEST(RunEpisode, DeterministicPerSeed) {
  const auto inst = small_synthetic();
  for (PolicyKind k : all_policy_kinds()) {
    if (needs_clinical_flag(k)) continue;
    const auto a = run_episode(inst, {k}, 5, {true, true, true});
    const auto b = run_episode(inst, {k}, 5, {true, true, true});
    EXPECT_EQ(a.per_group_total_reward, b.per_group_total_reward);
    EXPECT_EQ(a.actions_log, b.actions_log);
    EXPECT_EQ(a.state_log, b.state_log);
  }
}

TEST(RunEpisode, PolicyRandomnessLeavesTransitionsAlone) {
  // NoAct and Random with B = 0 act identically, so trajectories must match.
  const auto inst = small_synthetic(0);
  const auto a = run_episode(inst, {PolicyKind::NoAct}, 9, {false, false, true});
  const auto b = run_episode(inst, {PolicyKind::Random}, 9, {false, false, true});
  EXPECT_EQ(a.state_log, b.state_log);
}

TEST(RunEpisode, RewardConservedAgainstStateLog) {
  const auto inst = small_diabetes();
  const auto rec = run_episode(inst, {PolicyKind::MNWEG}, 2, {true, true, true});
  ASSERT_EQ(rec.state_log.size(), static_cast<std::size_t>(inst.horizon));
  double total = 0.0;
  for (const auto& round : rec.state_log)
    for (std::size_t n = 0; n < round.size(); ++n) total += inst.arms[n].reward(round[n]);
  EXPECT_NEAR(total, rec.total_reward, 1e-9);
  EXPECT_NEAR(std::accumulate(rec.per_group_total_reward.begin(), rec.per_group_total_reward.end(), 0.0),
              rec.total_reward, 1e-9);
  for (std::size_t g = 0; g < inst.n_groups; ++g)
    EXPECT_NEAR(DiabetesSpec{}.alpha * rec.per_group_engagement_reward[g] +
                    (1.0 - DiabetesSpec{}.alpha) * rec.per_group_clinical_reward[g],
                rec.per_group_total_reward[g], 1e-9);
}

TEST(RunEpisode, StartStateCountsAndFinalRoundRecorded) {
  SyntheticSpec spec;
  spec.n_arms = 20;
  spec.budget = 0;
  spec.horizon = 1;
  spec.start_state = 1;
  const auto rec = run_episode(build_synthetic(spec), {PolicyKind::NoAct}, 1);
  EXPECT_EQ(rec.total_reward, 20.0);
  EXPECT_EQ(rec.final_round_reward, 20.0);
}

TEST(RunEpisode, EveryLoggedRoundIsFeasible) {
  const auto inst = small_synthetic(5);
  for (PolicyKind k : {PolicyKind::Opt, PolicyKind::MMR, PolicyKind::MNW, PolicyKind::MNWEG}) {
    for (bool realloc : {true, false}) {
      PolicySpec p{k};
      p.realloc_every_round = realloc;
      const auto rec = run_episode(inst, p, 3, {true, true, false});
      for (std::size_t t = 0; t < rec.actions_log.size(); ++t) {
        EXPECT_LE(rec.actions_log[t].size(), 5u);
        if (!needs_allocation(k)) continue;
        std::vector<int> used(inst.n_groups, 0);
        for (std::size_t n : rec.actions_log[t]) ++used[inst.group_of[n]];
        for (std::size_t g = 0; g < inst.n_groups; ++g)
          EXPECT_LE(used[g], rec.allocation_log[t][g]);
      }
      if (needs_allocation(k) && !realloc)
        for (const auto& round : rec.allocation_log) EXPECT_EQ(round, rec.allocation_log.front());
    }
  }
}

TEST(RunEpisode, HeuristicsRejectedWithoutFlag) {
  EXPECT_THROW(run_episode(small_synthetic(), {PolicyKind::HRRR}, 1), Error);
}

TEST(RunEpisode, HeuristicsRunOnDiabetes) {
  const auto inst = small_diabetes();
  for (PolicyKind k : {PolicyKind::HRRR, PolicyKind::HRRand}) {
    const auto rec = run_episode(inst, {k}, 4, {true, false, false});
    for (const auto& round : rec.actions_log) EXPECT_LE(round.size(), 6u);
  }
}

TEST(RunEpisode, NoActGroupDMatchesChainExpectation) {
  // p(., ., 1) = 0.4 everywhere: 0 at t = 0, then 0.4 per round.
  SyntheticSpec spec;
  spec.budget = 0;
  const auto inst = build_synthetic(spec);
  const auto d = inst.members(3);
  std::vector<double> per_arm;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto rec = run_episode(inst, {PolicyKind::NoAct}, seed);
    per_arm.push_back(rec.per_group_total_reward[3] / static_cast<double>(d.size()));
  }
  const double n = static_cast<double>(per_arm.size());
  const double mean = std::accumulate(per_arm.begin(), per_arm.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : per_arm) ss += (x - mean) * (x - mean);
  const double se = std::sqrt(ss / (n - 1)) / std::sqrt(n);
  EXPECT_NEAR(mean, 7.6, 3 * se);
}
