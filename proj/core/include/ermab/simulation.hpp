#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ermab/arm_model.hpp"
#include "ermab/policies.hpp"

namespace ermab {

struct EpisodeOptions {
  bool log_actions = false;
  bool log_allocations = false;
  bool log_states = false;
};

/// Aggregates of one seeded episode of one policy.
struct SimulationRecord {
  std::uint64_t seed = 0;
  PolicyKind policy = PolicyKind::NoAct;
  bool realloc_every_round = true;

  std::vector<double> per_group_total_reward;
  std::vector<int> per_group_size;
  double total_reward = 0.0;
  double gini = 0.0;  ///< over per-group average reward

  /// Unweighted engagement and clinical reward totals (the reward is
  /// alpha * engagement + (1 - alpha) * clinical); empty unless the domain
  /// annotates its states.
  std::vector<double> per_group_engagement_reward;
  std::vector<double> per_group_clinical_reward;

  /// Summed reward of all arms in the last round (t = H - 1).
  double final_round_reward = 0.0;
  /// Mean budget per group over the rounds (allocation policies only).
  std::vector<double> per_group_mean_budget;
  /// Mean conjecture-gap diagnostic over allocation calls (MNW-EG only, else 0).
  double conjecture_gap = 0.0;

  std::vector<std::vector<std::size_t>> actions_log;
  std::vector<std::vector<int>> allocation_log;
  std::vector<std::vector<std::size_t>> state_log;
};

/// Runs one episode: for t = 0..H-1 accrue R(s^t) into each arm's group, (re)plan
/// the group allocation when the policy uses one, select actions, check
/// feasibility and sample next states. Deterministic per (instance, policy,
/// seed).
SimulationRecord run_episode(const GroupedInstance& instance, const PolicySpec& policy,
                             std::uint64_t seed, const EpisodeOptions& options = {});

/// Population Gini index sum_i sum_j |x_i - x_j| / (2 n^2 mu); 0 when mu = 0.
/// Throws NegativeInput on negative entries and EmptyInput on an empty span.
double gini(std::span<const double> values);

struct Summary {
  PolicyKind policy = PolicyKind::NoAct;
  std::size_t n_records = 0;
  double mean_reward_per_arm = 0.0;
  double stderr_reward_per_arm = 0.0;
  double mean_gini = 0.0;
  double stderr_gini = 0.0;
  std::vector<double> per_group_average;  ///< mean over seeds of group reward / group size
  std::vector<double> per_group_mean_budget;
};

/// Mean and standard error (sample std / sqrt(n); 0 for one record) across seeds.
Summary aggregate(std::span<const SimulationRecord> records);

}  // namespace ermab
