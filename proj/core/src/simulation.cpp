#include "ermab/simulation.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "ermab/errors.hpp"
#include "ermab/rng.hpp"

namespace ermab {

namespace {

std::size_t sample_next(std::span<const double> row, double u) {
  double acc = 0.0;
  for (std::size_t j = 0; j < row.size(); ++j) {
    acc += row[j];
    if (u < acc) return j;
  }
  // Rounding left u above the cumulative sum: take the last supported state.
  for (std::size_t j = row.size(); j-- > 0;)
    if (row[j] > 0.0) return j;
  return row.size() - 1;
}

}  // namespace

SimulationRecord run_episode(const GroupedInstance& instance, const PolicySpec& policy,
                             std::uint64_t seed, const EpisodeOptions& options) {
  validate_instance(instance);
  if (needs_clinical_flag(policy.kind) && !instance.annotations)
    throw Error(ErrorKind::DomainLacksClinicalFlag, std::string(to_string(policy.kind)));

  const std::size_t n = instance.n_arms();
  const std::size_t n_groups = instance.n_groups;
  const int horizon = instance.horizon;

  SimulationRecord rec;
  rec.seed = seed;
  rec.policy = policy.kind;
  rec.realloc_every_round = policy.realloc_every_round;
  rec.per_group_total_reward.assign(n_groups, 0.0);
  rec.per_group_size = instance.group_sizes();
  const bool split = instance.annotations.has_value();
  if (split) {
    rec.per_group_engagement_reward.assign(n_groups, 0.0);
    rec.per_group_clinical_reward.assign(n_groups, 0.0);
  }
  const bool allocating = needs_allocation(policy.kind);
  if (allocating) rec.per_group_mean_budget.assign(n_groups, 0.0);

  std::vector<std::uint64_t> keys(n);
  for (std::size_t i = 0; i < n; ++i) keys[i] = instance.arms[i].fingerprint();

  SolverCache cache(policy.precision);
  auto policy_rng = make_stream(seed, StreamPurpose::Policy);
  auto upsample_rng = make_stream(seed, StreamPurpose::Upsample);

  std::vector<std::size_t> states = instance.start_states;
  std::vector<std::size_t> next_states(n);
  ActHistory last_acted(n);
  std::vector<double> indexes;
  AllocationResult allocation;
  double gap_sum = 0.0;
  int gap_count = 0;

  for (int t = 0; t < horizon; ++t) {
    if (options.log_states) rec.state_log.push_back(states);
    double round_reward = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t g = instance.group_of[i];
      const double r = instance.arms[i].reward(states[i]);
      rec.per_group_total_reward[g] += r;
      round_reward += r;
      if (split) {
        rec.per_group_engagement_reward[g] += instance.annotations->engagement_reward[states[i]];
        rec.per_group_clinical_reward[g] += instance.annotations->clinical_reward[states[i]];
      }
    }
    if (t == horizon - 1) rec.final_round_reward = round_reward;

    const int remaining = horizon - t;
    if (needs_indexes(policy.kind)) {
      indexes.resize(n);
      for (std::size_t i = 0; i < n; ++i)
        indexes[i] = cache.index(instance.arms[i], keys[i], states[i], remaining);
    }
    if (allocating && (t == 0 || policy.realloc_every_round)) {
      PlanDiagnostics diag;
      allocation = plan_allocation(policy.kind, instance, states, remaining, indexes, keys,
                                   policy.charge_rule, upsample_rng, &diag);
      if (policy.kind == PolicyKind::MNWEG) {
        gap_sum += diag.conjecture_gap;
        ++gap_count;
      }
    }
    if (allocating) {
      for (std::size_t g = 0; g < n_groups; ++g)
        rec.per_group_mean_budget[g] += allocation.budgets[g];
      if (options.log_allocations) rec.allocation_log.push_back(allocation.budgets);
    }

    RoundContext round;
    round.instance = &instance;
    round.states = states;
    round.t = t;
    round.indexes = indexes;
    round.allocation = allocating ? &allocation : nullptr;
    round.last_acted = last_acted;
    round.rng = &policy_rng;
    const ActionVector actions = select_actions(policy, round);
    check_feasible(instance, actions, round.allocation);
    if (options.log_actions) rec.actions_log.push_back(actions.acted);

    std::vector<int> act(n, 0);
    for (std::size_t i : actions.acted) {
      act[i] = 1;
      last_acted[i] = t;
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double u = transition_uniform(seed, i, static_cast<std::uint64_t>(t));
      next_states[i] = sample_next(instance.arms[i].row(states[i], act[i]), u);
    }
    states.swap(next_states);
  }

  if (allocating)
    for (double& b : rec.per_group_mean_budget) b /= horizon;
  rec.conjecture_gap = gap_count ? gap_sum / gap_count : 0.0;
  rec.total_reward =
      std::accumulate(rec.per_group_total_reward.begin(), rec.per_group_total_reward.end(), 0.0);
  std::vector<double> averages(n_groups);
  for (std::size_t g = 0; g < n_groups; ++g)
    averages[g] = rec.per_group_total_reward[g] / rec.per_group_size[g];
  rec.gini = gini(averages);
  return rec;
}

double gini(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorKind::EmptyInput, "gini of no values");
  double sum = 0.0;
  for (double v : values) {
    if (v < 0.0) throw Error(ErrorKind::NegativeInput, "gini input " + std::to_string(v));
    sum += v;
  }
  const double count = static_cast<double>(values.size());
  const double mean = sum / count;
  if (mean == 0.0) return 0.0;
  double diff = 0.0;
  for (double a : values)
    for (double b : values) diff += std::abs(a - b);
  return diff / (2.0 * count * count * mean);
}

namespace {

void mean_and_stderr(std::span<const double> xs, double& mean, double& se) {
  const double count = static_cast<double>(xs.size());
  mean = std::accumulate(xs.begin(), xs.end(), 0.0) / count;
  if (xs.size() < 2) {
    se = 0.0;
    return;
  }
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  se = std::sqrt(ss / (count - 1.0)) / std::sqrt(count);
}

}  // namespace

Summary aggregate(std::span<const SimulationRecord> records) {
  if (records.empty()) throw Error(ErrorKind::EmptyInput, "no records to aggregate");
  Summary s;
  s.policy = records.front().policy;
  s.n_records = records.size();
  const std::size_t n_groups = records.front().per_group_total_reward.size();
  const int n_arms = std::accumulate(records.front().per_group_size.begin(),
                                     records.front().per_group_size.end(), 0);

  std::vector<double> per_arm, ginis;
  s.per_group_average.assign(n_groups, 0.0);
  const bool budgets = !records.front().per_group_mean_budget.empty();
  if (budgets) s.per_group_mean_budget.assign(n_groups, 0.0);
  for (const auto& r : records) {
    if (r.policy != s.policy || r.per_group_total_reward.size() != n_groups)
      throw Error(ErrorKind::InvalidArgument, "records mix policies or instance shapes");
    per_arm.push_back(r.total_reward / n_arms);
    ginis.push_back(r.gini);
    for (std::size_t g = 0; g < n_groups; ++g) {
      s.per_group_average[g] += r.per_group_total_reward[g] / r.per_group_size[g];
      if (budgets) s.per_group_mean_budget[g] += r.per_group_mean_budget[g];
    }
  }
  for (double& v : s.per_group_average) v /= static_cast<double>(records.size());
  for (double& v : s.per_group_mean_budget) v /= static_cast<double>(records.size());
  mean_and_stderr(per_arm, s.mean_reward_per_arm, s.stderr_reward_per_arm);
  mean_and_stderr(ginis, s.mean_gini, s.stderr_gini);
  return s;
}

}  // namespace ermab
