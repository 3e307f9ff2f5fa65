#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace ermab {

/// Floor applied to group values before taking logs in the MNW greedy step.
inline constexpr double kLogFloor = 1e-6;

/// Group-value evaluator used by the outer allocation loop: maps (group,
/// budget) to a non-negative scalar, with states and horizon bound by the
/// implementation. Results are memoized per (group, budget).
class GroupValueOracle {
 public:
  virtual ~GroupValueOracle() = default;

  double value(std::size_t group, int budget);
  std::size_t evaluations() const noexcept { return evaluations_; }

 protected:
  virtual double evaluate(std::size_t group, int budget) = 0;

 private:
  std::map<std::pair<std::size_t, int>, double> memo_;
  std::size_t evaluations_ = 0;
};

/// Adapts a plain callable into an oracle; handy for synthetic test oracles.
class FunctionOracle final : public GroupValueOracle {
 public:
  explicit FunctionOracle(std::function<double(std::size_t, int)> fn) : fn_(std::move(fn)) {}

 protected:
  double evaluate(std::size_t group, int budget) override { return fn_(group, budget); }

 private:
  std::function<double(std::size_t, int)> fn_;
};

struct AllocationStep {
  std::size_t group;
  double value;  ///< MMR: normalized value after the step; MNW: log gain taken
};

struct AllocationResult {
  std::vector<int> budgets;
  std::vector<AllocationStep> objective_trace;
  std::vector<double> final_values;  ///< oracle value at the chosen budgets
};

/// Water filling for maximin reward: each unit goes to the group with the
/// lowest size-normalized value L_g(b_g) / |g|, lowest index on ties. Groups at
/// their size cap drop out. Throws BudgetExceedsArms if B > sum of sizes.
AllocationResult allocate_mmr(std::span<const int> group_sizes, int total_budget,
                              GroupValueOracle& oracle);

/// Greedy max Nash welfare: each unit goes to the group with the largest
/// log L_g(b_g + 1) - log L_g(b_g), lowest index on ties. Values are floored at
/// kLogFloor before the log; negative values throw NonPositiveValue.
///
/// `budget_caps` bounds each group's budget (normally the group size).
AllocationResult allocate_mnw(std::span<const int> budget_caps, int total_budget,
                              GroupValueOracle& oracle);

/// Equalized-group MNW. `oracle` must evaluate groups already upsampled to
/// `target_size` arms each; the greedy runs in that space and its budgets are
/// rescaled back to `original_sizes`. final_values and objective_trace stay in
/// the upsampled space (values at the pre-rescale greedy budgets).
AllocationResult allocate_mnw_equalized(std::span<const int> original_sizes, int target_size,
                                        int total_budget, GroupValueOracle& oracle);

/// Extends a group of `size` members to `target_size` by drawing the extra
/// members uniformly with replacement. Returns the source index for every
/// slot: the first `size` entries are 0..size-1.
std::vector<std::size_t> upsample_indices(std::size_t size, std::size_t target_size,
                                          std::mt19937_64& rng);

/// Convenience wrapper over upsample_indices for any copyable member type.
template <class T>
std::vector<T> upsample(std::span<const T> group, std::size_t target_size, std::mt19937_64& rng) {
  std::vector<T> out;
  out.reserve(target_size);
  for (std::size_t i : upsample_indices(group.size(), target_size, rng)) out.push_back(group[i]);
  return out;
}

/// Maps budgets found on equal-size (target_size) groups back to the original
/// sizes: weights w_g = b_g * |g| / target_size, then B is apportioned in
/// proportion to w by largest remainder with each group capped at its size.
/// All-zero weights fall back to a uniform split.
std::vector<int> rescale(std::span<const int> upsampled_budgets, std::span<const int> original_sizes,
                         int target_size, int total_budget);

/// Largest-remainder apportionment of `total` in proportion to `weights`,
/// with per-entry caps. Requires total <= sum(caps).
std::vector<int> apportion(std::span<const double> weights, std::span<const int> caps, int total);

/// Relative deviation |big - C * small| / (C * small) between a group's value
/// after upsampling by factor C (evaluated at C * b) and C times its original
/// value at b. Diagnostic only.
double conjecture_gap(double original_value, double upsampled_value, double scale);

}  // namespace ermab
