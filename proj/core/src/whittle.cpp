#include "ermab/whittle.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "ermab/errors.hpp"
#include "ermab/value_iteration.hpp"

namespace ermab {

namespace {

// Bracketed bisection for the root of a non-increasing advantage function.
template <class Advantage>
double bisect(Advantage&& advantage, int remaining, double precision) {
  double lo = -1.0;
  double hi = static_cast<double>(remaining) + 1.0;
  while (hi - lo > precision) {
    const double mid = 0.5 * (lo + hi);
    if (advantage(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

void check_search_args(int remaining, double precision) {
  if (remaining < 1) throw Error(ErrorKind::InvalidArgument, "remaining horizon must be >= 1");
  if (!(precision > 0.0)) throw Error(ErrorKind::InvalidArgument, "precision must be > 0");
}

}  // namespace

double whittle_index(const ArmModel& arm, std::size_t state, int remaining, double precision) {
  check_search_args(remaining, precision);
  return bisect([&](double charge) { return action_advantage(arm, state, remaining, charge); },
                remaining, precision);
}

bool probe_indexability(const ArmModel& arm, std::size_t state, int remaining, int grid_points) {
  check_search_args(remaining, 1.0);
  const double lo = -1.0;
  const double hi = static_cast<double>(remaining) + 1.0;
  double prev = action_advantage(arm, state, remaining, lo);
  for (int i = 1; i < grid_points; ++i) {
    const double charge = lo + (hi - lo) * i / (grid_points - 1);
    const double cur = action_advantage(arm, state, remaining, charge);
    if (cur > prev + 1e-9) return false;
    prev = cur;
  }
  return true;
}

double lagrange_charge(std::span<const double> indexes, int budget, int remaining) {
  const int n = static_cast<int>(indexes.size());
  if (budget < 0) throw Error(ErrorKind::InvalidArgument, "negative budget");
  if (budget > n)
    throw Error(ErrorKind::BudgetExceedsGroup,
                "b=" + std::to_string(budget) + " n=" + std::to_string(n));
  if (budget == n) return 0.0;
  if (budget == 0) return static_cast<double>(remaining) + 1.0;

  // Partial sort is enough: we need the b-th and (b+1)-th largest.
  std::vector<double> sorted(indexes.begin(), indexes.end());
  std::nth_element(sorted.begin(), sorted.begin() + budget, sorted.end(), std::greater<>());
  const double below = sorted[static_cast<std::size_t>(budget)];
  const double above =
      *std::min_element(sorted.begin(), sorted.begin() + budget);
  return std::max(0.0, 0.5 * (above + below));
}

GroupValueBound whittle_to_lagrange(std::span<const ArmModel> arms,
                                    std::span<const std::size_t> states, int budget,
                                    int remaining, const WhittleIndexSet& indexes) {
  if (arms.size() != states.size() || arms.size() != indexes.indexes.size())
    throw Error(ErrorKind::InvalidArgument, "arms/states/indexes length mismatch");
  if (remaining < 1) throw Error(ErrorKind::InvalidArgument, "remaining horizon must be >= 1");

  GroupValueBound bound;
  bound.budget = budget;
  bound.lambda_star = lagrange_charge(indexes.indexes, budget, remaining);
  bound.per_arm_values.reserve(arms.size());
  double total = 0.0;
  for (std::size_t i = 0; i < arms.size(); ++i) {
    const double v = charged_values(arms[i], remaining, bound.lambda_star)[states[i]];
    bound.per_arm_values.push_back(v);
    total += v;
  }
  bound.value = total + budget * remaining * bound.lambda_star;
  return bound;
}

double SolverCache::index(const ArmModel& arm, std::uint64_t key, std::size_t state,
                          int remaining) {
  const auto k = std::make_tuple(key, state, remaining);
  if (auto it = index_memo_.find(k); it != index_memo_.end()) return it->second;
  const double w = whittle_index(arm, state, remaining, precision_);
  index_memo_.emplace(k, w);
  return w;
}

LagrangeBoundTable::LagrangeBoundTable(std::span<const ArmModel* const> arms,
                                       std::span<const std::uint64_t> keys,
                                       std::span<const std::size_t> states, int remaining,
                                       std::span<const double> indexes)
    : arms_(arms.begin(), arms.end()), states_(states.begin(), states.end()),
      remaining_(remaining) {
  const std::size_t n = arms.size();
  if (keys.size() != n || states.size() != n || indexes.size() != n)
    throw Error(ErrorKind::InvalidArgument, "arms/keys/states/indexes length mismatch");
  if (remaining < 1) throw Error(ErrorKind::InvalidArgument, "remaining horizon must be >= 1");

  for (int b = 0; b <= static_cast<int>(n); ++b)
    candidate_charge_.push_back(lagrange_charge(indexes, b, remaining));

  // Distinct dynamics, each with one representative arm.
  std::map<std::uint64_t, const ArmModel*> distinct;
  for (std::size_t i = 0; i < n; ++i) distinct.emplace(keys[i], arms[i]);

  // Budgets often share a charge (equal indexes); solve each charge once.
  std::map<double, double> sum_at;
  for (double charge : candidate_charge_) {
    if (sum_at.count(charge)) continue;
    std::map<std::uint64_t, std::vector<double>> values;
    for (const auto& [key, arm] : distinct) values.emplace(key, charged_values(*arm, remaining, charge));
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += values.at(keys[i])[states[i]];
    sum_at.emplace(charge, total);
  }
  for (double charge : candidate_charge_) candidate_sum_.push_back(sum_at.at(charge));
}

double LagrangeBoundTable::charge_for(int budget, ChargeRule rule) const {
  if (budget < 0 || budget > size())
    throw Error(ErrorKind::BudgetExceedsGroup,
                "b=" + std::to_string(budget) + " n=" + std::to_string(size()));
  const auto b = static_cast<std::size_t>(budget);
  if (rule == ChargeRule::Midpoint) return candidate_charge_[b];
  std::size_t best = b;
  double best_value = candidate_sum_[b] + budget * remaining_ * candidate_charge_[b];
  for (std::size_t j = 0; j < candidate_charge_.size(); ++j) {
    const double v = candidate_sum_[j] + budget * remaining_ * candidate_charge_[j];
    if (v < best_value) {
      best_value = v;
      best = j;
    }
  }
  return candidate_charge_[best];
}

double LagrangeBoundTable::value(int budget, ChargeRule rule) const {
  const double charge = charge_for(budget, rule);
  const auto it = std::find(candidate_charge_.begin(), candidate_charge_.end(), charge);
  return candidate_sum_[static_cast<std::size_t>(it - candidate_charge_.begin())] +
         budget * remaining_ * charge;
}

GroupValueBound LagrangeBoundTable::bound(int budget, ChargeRule rule) const {
  GroupValueBound out;
  out.budget = budget;
  out.lambda_star = charge_for(budget, rule);
  double total = 0.0;
  for (std::size_t i = 0; i < arms_.size(); ++i) {
    const double v = charged_values(*arms_[i], remaining_, out.lambda_star)[states_[i]];
    out.per_arm_values.push_back(v);
    total += v;
  }
  out.value = total + budget * remaining_ * out.lambda_star;
  return out;
}

}  // namespace ermab
