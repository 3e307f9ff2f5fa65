#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <tuple>
#include <vector>

#include "ermab/arm_model.hpp"

namespace ermab {

inline constexpr double kDefaultPrecision = 1e-4;

/// Whittle index of `arm` at state `state` with `remaining` rounds to go: the
/// charge at which acting and not acting have equal value. Binary search over
/// [-1, remaining + 1] until the bracket is narrower than `precision`; returns
/// the bracket midpoint.
double whittle_index(const ArmModel& arm, std::size_t state, int remaining,
                     double precision = kDefaultPrecision);

/// True when the act-minus-passive advantage is non-increasing in the charge
/// over a uniform probe grid on the search interval. A false result means the
/// arm may not be indexable at this state; whittle_index still returns the
/// first crossing it finds.
bool probe_indexability(const ArmModel& arm, std::size_t state, int remaining,
                        int grid_points = 33);

/// Indexes for a list of arms at their current states.
struct WhittleIndexSet {
  std::vector<double> indexes;
  double precision = kDefaultPrecision;
};

/// Lagrangian group-value estimate at budget b.
struct GroupValueBound {
  double value = 0.0;
  double lambda_star = 0.0;
  std::vector<double> per_arm_values;
  int budget = 0;
};

/// Charge used by the Whittle-to-Lagrange conversion for budget b given the
/// group's indexes. Descending sort W[0..n-1]: 1 <= b <= n-1 gives
/// (W[b-1] + W[b]) / 2, b = n gives 0, b = 0 gives remaining + 1 (above any
/// attainable index). Clamped at 0.
double lagrange_charge(std::span<const double> indexes, int budget, int remaining);

/// Whittle-to-Lagrange: value = sum_n V_n(s_n, lambda*) + b * remaining * lambda*.
GroupValueBound whittle_to_lagrange(std::span<const ArmModel> arms,
                                    std::span<const std::size_t> states, int budget,
                                    int remaining, const WhittleIndexSet& indexes);

/// How a group's Lagrangian bound picks its action charge.
enum class ChargeRule {
  /// The single Whittle-to-Lagrange charge for budget b (lagrange_charge).
  Midpoint,
  /// The smallest bound over the Whittle-to-Lagrange charges of every budget
  /// 0..n. Each candidate is a valid upper bound, and the minimum of affine
  /// functions of b with non-negative slopes is monotone and concave in b.
  Envelope,
};

/// Per-group table of sum_n V_n(s_n, lambda) for every candidate charge
/// lambda*(b'), b' = 0..n, built once per group and round so that bounds for
/// any budget cost O(n). Arms are borrowed and must outlive the table.
class LagrangeBoundTable {
 public:
  LagrangeBoundTable(std::span<const ArmModel* const> arms, std::span<const std::uint64_t> keys,
                     std::span<const std::size_t> states, int remaining,
                     std::span<const double> indexes);

  int size() const noexcept { return static_cast<int>(arms_.size()); }
  int remaining() const noexcept { return remaining_; }

  double value(int budget, ChargeRule rule) const;
  /// Full bound with per-arm values at the selected charge.
  GroupValueBound bound(int budget, ChargeRule rule) const;

 private:
  double charge_for(int budget, ChargeRule rule) const;

  std::vector<const ArmModel*> arms_;
  std::vector<std::size_t> states_;
  int remaining_;
  std::vector<double> candidate_charge_;  ///< lambda*(b') for b' = 0..n
  std::vector<double> candidate_sum_;     ///< sum_n V_n(s_n, lambda*(b'))
};

/// Memo of Whittle indexes keyed by arm dynamics. Arms that share dynamics
/// (all Synthetic and Diabetes arms within a group, and every upsampled copy)
/// reuse results. Not thread-safe; use one per worker.
class SolverCache {
 public:
  explicit SolverCache(double precision = kDefaultPrecision) : precision_(precision) {}

  double precision() const noexcept { return precision_; }
  double index(const ArmModel& arm, std::uint64_t key, std::size_t state, int remaining);

 private:
  double precision_;
  std::map<std::tuple<std::uint64_t, std::size_t, int>, double> index_memo_;
};

}  // namespace ermab
