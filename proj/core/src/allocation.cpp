#include "ermab/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ermab/errors.hpp"

namespace ermab {

double GroupValueOracle::value(std::size_t group, int budget) {
  const auto key = std::make_pair(group, budget);
  if (auto it = memo_.find(key); it != memo_.end()) return it->second;
  const double v = evaluate(group, budget);
  ++evaluations_;
  memo_.emplace(key, v);
  return v;
}

namespace {

void check_budget(std::span<const int> caps, int total_budget) {
  if (total_budget < 0) throw Error(ErrorKind::InvalidArgument, "negative total budget");
  long capacity = 0;
  for (int c : caps) {
    if (c < 0) throw Error(ErrorKind::InvalidArgument, "negative group size");
    capacity += c;
  }
  if (total_budget > capacity)
    throw Error(ErrorKind::BudgetExceedsArms, "B=" + std::to_string(total_budget) +
                                                  " exceeds " + std::to_string(capacity) + " arms");
}

double checked(double v, std::size_t g, int b) {
  if (!(v >= 0.0))
    throw Error(ErrorKind::NonPositiveValue,
                "group " + std::to_string(g) + " budget " + std::to_string(b) + " value " +
                    std::to_string(v));
  return v;
}

double floored_log(double v) { return std::log(std::max(v, kLogFloor)); }

}  // namespace

AllocationResult allocate_mmr(std::span<const int> group_sizes, int total_budget,
                              GroupValueOracle& oracle) {
  check_budget(group_sizes, total_budget);
  const std::size_t n_groups = group_sizes.size();

  AllocationResult result;
  result.budgets.assign(n_groups, 0);
  std::vector<double> normalized(n_groups);
  for (std::size_t g = 0; g < n_groups; ++g)
    normalized[g] = checked(oracle.value(g, 0), g, 0) / std::max(group_sizes[g], 1);

  for (int unit = 0; unit < total_budget; ++unit) {
    std::size_t best = n_groups;
    for (std::size_t g = 0; g < n_groups; ++g) {
      if (result.budgets[g] >= group_sizes[g]) continue;
      if (best == n_groups || normalized[g] < normalized[best]) best = g;
    }
    const int b = ++result.budgets[best];
    normalized[best] = checked(oracle.value(best, b), best, b) / group_sizes[best];
    result.objective_trace.push_back({best, normalized[best]});
  }

  result.final_values.resize(n_groups);
  for (std::size_t g = 0; g < n_groups; ++g)
    result.final_values[g] = oracle.value(g, result.budgets[g]);
  return result;
}

AllocationResult allocate_mnw(std::span<const int> budget_caps, int total_budget,
                              GroupValueOracle& oracle) {
  check_budget(budget_caps, total_budget);
  const std::size_t n_groups = budget_caps.size();

  AllocationResult result;
  result.budgets.assign(n_groups, 0);
  std::vector<double> current(n_groups), gain(n_groups, 0.0);
  auto refresh = [&](std::size_t g) {
    const int b = result.budgets[g];
    current[g] = checked(oracle.value(g, b), g, b);
    if (b < budget_caps[g])
      gain[g] = floored_log(checked(oracle.value(g, b + 1), g, b + 1)) - floored_log(current[g]);
  };
  if (total_budget > 0)
    for (std::size_t g = 0; g < n_groups; ++g) refresh(g);

  for (int unit = 0; unit < total_budget; ++unit) {
    std::size_t best = n_groups;
    for (std::size_t g = 0; g < n_groups; ++g) {
      if (result.budgets[g] >= budget_caps[g]) continue;
      if (best == n_groups || gain[g] > gain[best]) best = g;
    }
    const double taken = gain[best];
    ++result.budgets[best];
    refresh(best);
    result.objective_trace.push_back({best, taken});
  }

  result.final_values.resize(n_groups);
  for (std::size_t g = 0; g < n_groups; ++g)
    result.final_values[g] = oracle.value(g, result.budgets[g]);
  return result;
}

AllocationResult allocate_mnw_equalized(std::span<const int> original_sizes, int target_size,
                                        int total_budget, GroupValueOracle& oracle) {
  for (int size : original_sizes)
    if (size > target_size)
      throw Error(ErrorKind::InvalidArgument, "target size below an original group size");
  check_budget(original_sizes, total_budget);
  const std::vector<int> caps(original_sizes.size(), target_size);
  AllocationResult result = allocate_mnw(caps, total_budget, oracle);
  result.budgets = rescale(result.budgets, original_sizes, target_size, total_budget);
  return result;
}

std::vector<std::size_t> upsample_indices(std::size_t size, std::size_t target_size,
                                          std::mt19937_64& rng) {
  if (size == 0) throw Error(ErrorKind::InvalidArgument, "cannot upsample an empty group");
  if (target_size < size)
    throw Error(ErrorKind::InvalidArgument, "target size below group size");
  std::vector<std::size_t> out(size);
  std::iota(out.begin(), out.end(), std::size_t{0});
  std::uniform_int_distribution<std::size_t> pick(0, size - 1);
  while (out.size() < target_size) out.push_back(pick(rng));
  return out;
}

std::vector<int> apportion(std::span<const double> weights, std::span<const int> caps, int total) {
  const std::size_t n = weights.size();
  check_budget(caps, total);
  std::vector<int> out(n, 0);
  if (n == 0 || total == 0) return out;

  std::vector<double> w(weights.begin(), weights.end());
  double sum = std::accumulate(w.begin(), w.end(), 0.0);
  if (!(sum > 0.0)) {
    std::fill(w.begin(), w.end(), 1.0);
    sum = static_cast<double>(n);
  }

  std::vector<double> remainder(n, 0.0);
  int assigned = 0;
  for (std::size_t g = 0; g < n; ++g) {
    const double quota = total * w[g] / sum;
    const int whole = static_cast<int>(std::floor(quota + 1e-12));
    out[g] = std::min(whole, caps[g]);
    remainder[g] = out[g] < caps[g] ? quota - whole : -1.0;
    assigned += out[g];
  }

  // Hand out leftover units by descending remainder, lowest index on ties,
  // cycling until done; capped entries are skipped.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  while (assigned < total) {
    bool progressed = false;
    for (std::size_t g : order) {
      if (assigned == total) break;
      if (out[g] >= caps[g]) continue;
      ++out[g];
      ++assigned;
      progressed = true;
    }
    if (!progressed) break;
  }
  return out;
}

std::vector<int> rescale(std::span<const int> upsampled_budgets, std::span<const int> original_sizes,
                         int target_size, int total_budget) {
  if (upsampled_budgets.size() != original_sizes.size())
    throw Error(ErrorKind::InvalidArgument, "budget / size length mismatch");
  if (target_size <= 0) throw Error(ErrorKind::InvalidArgument, "target size must be positive");
  std::vector<double> weights(original_sizes.size());
  for (std::size_t g = 0; g < weights.size(); ++g)
    weights[g] = static_cast<double>(upsampled_budgets[g]) * original_sizes[g] / target_size;
  return apportion(weights, original_sizes, total_budget);
}

double conjecture_gap(double original_value, double upsampled_value, double scale) {
  const double expected = scale * original_value;
  if (expected == 0.0) return upsampled_value == 0.0 ? 0.0 : 1.0;
  return std::abs(upsampled_value - expected) / expected;
}

}  // namespace ermab
