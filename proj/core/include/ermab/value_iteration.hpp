#pragma once

#include <cstddef>
#include <vector>

#include "ermab/arm_model.hpp"

namespace ermab {

/// Action values closer than this are treated as equal and resolved passively.
inline constexpr double kTieTolerance = 1e-12;

/// Finite-horizon value table of a single arm under a constant action charge.
///
/// Rows are indexed by absolute time k in [start_time, horizon]; the row at
/// k = horizon is the all-zero terminal row.
class ChargedValueTable {
 public:
  ChargedValueTable(std::size_t n_states, int start_time, int horizon, double charge);

  int start_time() const noexcept { return start_time_; }
  int horizon() const noexcept { return horizon_; }
  double charge() const noexcept { return charge_; }
  std::size_t n_states() const noexcept { return n_states_; }

  double value(int k, std::size_t s) const { return values_[row(k) + s]; }
  /// Charge-optimal action at (k, s) for k < horizon.
  int action(int k, std::size_t s) const { return actions_[row(k) + s]; }
  /// Expected number of actions taken from (start_time, s) onward under the
  /// charge-optimal policy.
  double spend(std::size_t s) const { return spend_[s]; }

 private:
  friend ChargedValueTable charged_value_iteration(const ArmModel&, int, int, double);

  std::size_t row(int k) const {
    return static_cast<std::size_t>(k - start_time_) * n_states_;
  }

  std::size_t n_states_;
  int start_time_;
  int horizon_;
  double charge_;
  std::vector<double> values_;
  std::vector<int> actions_;
  std::vector<double> spend_;
};

/// Backward induction of
///   V^k(s) = max_a [ R(s) - a*charge + sum_s' P(s,a,s') V^{k+1}(s') ],  V^H = 0
/// for k = horizon-1 down to start_time. Ties prefer the passive action.
ChargedValueTable charged_value_iteration(const ArmModel& arm, int start_time, int horizon,
                                          double charge);

/// V^0(s) for a stationary arm with `remaining` rounds to go, all states.
std::vector<double> charged_values(const ArmModel& arm, int remaining, double charge);

/// Value of the never-act policy over `remaining` rounds, all states.
std::vector<double> passive_values(const ArmModel& arm, int remaining);

/// Act-minus-passive action value at state s with `remaining` rounds to go
/// under the given charge. The Whittle index is the root of this in `charge`.
double action_advantage(const ArmModel& arm, std::size_t s, int remaining, double charge);

}  // namespace ermab
