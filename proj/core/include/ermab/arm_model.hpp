#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace ermab {

/// Binary action: 0 = passive, 1 = act.
inline constexpr int kNumActions = 2;

/// Tolerance on transition-row sums.
inline constexpr double kStochasticTolerance = 1e-9;

/// One arm's finite MDP with binary actions.
///
/// Transitions are stored densely as P[s][a][s'] in row-major order. Rewards
/// are state rewards in [0, 1], collected for the state occupied at each round.
class ArmModel {
 public:
  ArmModel() = default;

  /// Builds an arm from a flat (s, a, s') tensor. Does not validate; call
  /// validate_arm() before use in a solver.
  ArmModel(std::size_t n_states, std::vector<double> transitions, std::vector<double> rewards,
           std::size_t group_id = 0);

  std::size_t n_states() const noexcept { return n_states_; }
  std::size_t group_id() const noexcept { return group_id_; }
  void set_group_id(std::size_t g) noexcept { group_id_ = g; }

  double p(std::size_t s, int a, std::size_t next) const noexcept {
    return transitions_[(s * kNumActions + static_cast<std::size_t>(a)) * n_states_ + next];
  }
  double& p(std::size_t s, int a, std::size_t next) noexcept {
    return transitions_[(s * kNumActions + static_cast<std::size_t>(a)) * n_states_ + next];
  }

  /// The distribution over next states for (s, a).
  std::span<const double> row(std::size_t s, int a) const noexcept {
    return {transitions_.data() + (s * kNumActions + static_cast<std::size_t>(a)) * n_states_,
            n_states_};
  }

  double reward(std::size_t s) const noexcept { return rewards_[s]; }
  std::span<const double> rewards() const noexcept { return rewards_; }
  std::span<const double> transitions() const noexcept { return transitions_; }

  /// Content hash over transitions and rewards (group id excluded). Arms with
  /// equal fingerprints have identical dynamics, which lets solvers share work.
  std::uint64_t fingerprint() const noexcept;

  friend bool operator==(const ArmModel&, const ArmModel&) = default;

 private:
  std::size_t n_states_ = 0;
  std::vector<double> transitions_;
  std::vector<double> rewards_;
  std::size_t group_id_ = 0;
};

/// Returns the arm unchanged if every row is stochastic and every reward lies
/// in [0, 1]; throws Error(RowNotStochastic | RewardOutOfRange) otherwise.
const ArmModel& validate_arm(const ArmModel& arm);

/// Per-state labels used by domain-specific baselines and component reward
/// reporting. Present only on domains that define them (Digital Diabetes).
struct StateAnnotations {
  std::vector<bool> high_risk;              ///< clinical "high" flag (A1c >= 8)
  std::vector<bool> dropout;                ///< absorbing disengaged state
  std::vector<double> engagement_reward;    ///< unweighted r_E component
  std::vector<double> clinical_reward;      ///< unweighted r_C component
};

/// A full grouped restless-bandit instance.
struct GroupedInstance {
  std::vector<ArmModel> arms;
  std::vector<std::size_t> group_of;     ///< arm index -> group index
  std::size_t n_groups = 0;
  int horizon = 0;
  int total_budget = 0;
  std::vector<std::size_t> start_states;
  std::optional<StateAnnotations> annotations;

  std::size_t n_arms() const noexcept { return arms.size(); }

  /// Arm indices of group g, ascending.
  std::vector<std::size_t> members(std::size_t g) const;
  std::vector<int> group_sizes() const;
};

/// Checks every arm, the surjective group map, start states, horizon and budget.
void validate_instance(const GroupedInstance& instance);

}  // namespace ermab
