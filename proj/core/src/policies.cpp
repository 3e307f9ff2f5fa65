#include "ermab/policies.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <numeric>
#include <string>

#include "ermab/errors.hpp"

namespace ermab {

namespace {

constexpr std::array<PolicyKind, 8> kAllKinds = {
    PolicyKind::NoAct, PolicyKind::Random, PolicyKind::Opt,  PolicyKind::MMR,
    PolicyKind::MNW,   PolicyKind::MNWEG,  PolicyKind::HRRR, PolicyKind::HRRand,
};

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Uniformly chooses `count` members of `pool` without replacement.
std::vector<std::size_t> sample_without_replacement(std::vector<std::size_t> pool,
                                                    std::size_t count, std::mt19937_64& rng) {
  count = std::min(count, pool.size());
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(count);
  return pool;
}

// Least recently acted first (never acted before anything), then arm index.
std::vector<std::size_t> least_recent(std::vector<std::size_t> pool,
                                      std::span<const std::optional<int>> last_acted,
                                      std::size_t count) {
  auto key = [&](std::size_t n) {
    return last_acted[n] ? static_cast<long>(*last_acted[n]) : std::numeric_limits<long>::min();
  };
  std::stable_sort(pool.begin(), pool.end(), [&](std::size_t a, std::size_t b) {
    return key(a) != key(b) ? key(a) < key(b) : a < b;
  });
  pool.resize(std::min(count, pool.size()));
  return pool;
}

ActionVector heuristic_risk(const PolicySpec& policy, const RoundContext& round) {
  const GroupedInstance& inst = *round.instance;
  if (!inst.annotations)
    throw Error(ErrorKind::DomainLacksClinicalFlag,
                std::string(to_string(policy.kind)) + " needs a clinical flag per state");
  const auto& ann = *inst.annotations;
  std::vector<std::size_t> high, low;
  for (std::size_t n = 0; n < inst.n_arms(); ++n) {
    const std::size_t s = round.states[n];
    if (ann.dropout[s]) continue;
    (ann.high_risk[s] ? high : low).push_back(n);
  }
  const auto budget = static_cast<std::size_t>(inst.total_budget);

  ActionVector out;
  if (policy.kind == PolicyKind::HRRR) {
    if (round.last_acted.size() != inst.n_arms())
      throw Error(ErrorKind::InvalidArgument, "HR-RR needs an action history for every arm");
    out.acted = least_recent(high, round.last_acted, budget);
    if (out.acted.size() < budget) {
      auto fill = least_recent(low, round.last_acted, budget - out.acted.size());
      out.acted.insert(out.acted.end(), fill.begin(), fill.end());
    }
  } else {
    if (!round.rng) throw Error(ErrorKind::InvalidArgument, "HR-Rand needs a random stream");
    out.acted = sample_without_replacement(high, budget, *round.rng);
    if (out.acted.size() < budget) {
      auto fill = sample_without_replacement(low, budget - out.acted.size(), *round.rng);
      out.acted.insert(out.acted.end(), fill.begin(), fill.end());
    }
  }
  std::sort(out.acted.begin(), out.acted.end());
  return out;
}

}  // namespace

std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::NoAct: return "NoAct";
    case PolicyKind::Random: return "Random";
    case PolicyKind::Opt: return "Opt";
    case PolicyKind::MMR: return "MMR";
    case PolicyKind::MNW: return "MNW";
    case PolicyKind::MNWEG: return "MNW-EG";
    case PolicyKind::HRRR: return "HR-RR";
    case PolicyKind::HRRand: return "HR-Rand";
  }
  return "?";
}

std::optional<PolicyKind> parse_policy_kind(std::string_view name) {
  const std::string needle = lower(name);
  for (PolicyKind k : kAllKinds)
    if (lower(to_string(k)) == needle) return k;
  return std::nullopt;
}

std::span<const PolicyKind> all_policy_kinds() { return kAllKinds; }

std::vector<std::size_t> top_by_score(std::span<const std::size_t> candidates,
                                      std::span<const double> scores, std::size_t count) {
  std::vector<std::size_t> pool(candidates.begin(), candidates.end());
  count = std::min(count, pool.size());
  std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(count), pool.end(),
                    [&](std::size_t a, std::size_t b) {
                      return scores[a] != scores[b] ? scores[a] > scores[b] : a < b;
                    });
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

ActionVector select_actions(const PolicySpec& policy, const RoundContext& round) {
  if (!round.instance) throw Error(ErrorKind::InvalidArgument, "round has no instance");
  const GroupedInstance& inst = *round.instance;
  const std::size_t n = inst.n_arms();
  if (round.states.size() != n) throw Error(ErrorKind::InvalidArgument, "state vector size");
  const auto budget = static_cast<std::size_t>(inst.total_budget);

  if (needs_allocation(policy.kind) && !round.allocation)
    throw Error(ErrorKind::MissingAllocation, std::string(to_string(policy.kind)));
  if (needs_indexes(policy.kind) && round.indexes.size() != n)
    throw Error(ErrorKind::InvalidArgument, "policy needs one index per arm");

  std::vector<std::size_t> everyone(n);
  std::iota(everyone.begin(), everyone.end(), std::size_t{0});

  ActionVector out;
  switch (policy.kind) {
    case PolicyKind::NoAct:
      break;
    case PolicyKind::Random:
      if (!round.rng) throw Error(ErrorKind::InvalidArgument, "Random needs a random stream");
      out.acted = sample_without_replacement(everyone, budget, *round.rng);
      std::sort(out.acted.begin(), out.acted.end());
      break;
    case PolicyKind::Opt:
      out.acted = top_by_score(everyone, round.indexes, budget);
      break;
    case PolicyKind::MMR:
    case PolicyKind::MNW:
    case PolicyKind::MNWEG: {
      const auto& budgets = round.allocation->budgets;
      if (budgets.size() != inst.n_groups)
        throw Error(ErrorKind::InvalidArgument, "allocation has wrong group count");
      for (std::size_t g = 0; g < inst.n_groups; ++g) {
        const auto chosen = top_by_score(inst.members(g), round.indexes,
                                         static_cast<std::size_t>(std::max(budgets[g], 0)));
        out.acted.insert(out.acted.end(), chosen.begin(), chosen.end());
      }
      std::sort(out.acted.begin(), out.acted.end());
      break;
    }
    case PolicyKind::HRRR:
    case PolicyKind::HRRand:
      return heuristic_risk(policy, round);
  }
  return out;
}

void check_feasible(const GroupedInstance& instance, const ActionVector& actions,
                    const AllocationResult* allocation) {
  if (actions.acted.size() > static_cast<std::size_t>(instance.total_budget))
    throw Error(ErrorKind::BudgetExceedsArms,
                "acted on " + std::to_string(actions.acted.size()) + " arms with B=" +
                    std::to_string(instance.total_budget));
  std::vector<int> per_group(instance.n_groups, 0);
  for (std::size_t i = 0; i < actions.acted.size(); ++i) {
    const std::size_t arm = actions.acted[i];
    if (arm >= instance.n_arms() || (i > 0 && actions.acted[i - 1] >= arm))
      throw Error(ErrorKind::InvalidArgument, "action set not a sorted set of arm indices");
    ++per_group[instance.group_of[arm]];
  }
  if (!allocation) return;
  for (std::size_t g = 0; g < instance.n_groups; ++g)
    if (per_group[g] > allocation->budgets[g])
      throw Error(ErrorKind::BudgetExceedsGroup, "group " + std::to_string(g) + " used " +
                                                     std::to_string(per_group[g]) + " of " +
                                                     std::to_string(allocation->budgets[g]));
}

namespace {

// One group's arms as seen by the oracle (possibly with upsampled copies).
struct GroupView {
  std::vector<const ArmModel*> arms;
  std::vector<std::uint64_t> keys;
  std::vector<std::size_t> states;
  std::vector<double> indexes;
};

// Lagrangian group values, one bound table per group built on first use.
class LagrangeOracle final : public GroupValueOracle {
 public:
  LagrangeOracle(const std::vector<GroupView>& groups, int remaining, ChargeRule rule)
      : groups_(groups), tables_(groups.size()), remaining_(remaining), rule_(rule) {}

 protected:
  double evaluate(std::size_t g, int budget) override {
    if (!tables_[g]) {
      const GroupView& v = groups_[g];
      tables_[g].emplace(v.arms, v.keys, v.states, remaining_, v.indexes);
    }
    return tables_[g]->value(budget, rule_);
  }

 private:
  const std::vector<GroupView>& groups_;
  std::vector<std::optional<LagrangeBoundTable>> tables_;
  int remaining_;
  ChargeRule rule_;
};

std::vector<GroupView> group_views(const GroupedInstance& inst,
                                   std::span<const std::size_t> states,
                                   std::span<const double> indexes,
                                   std::span<const std::uint64_t> keys) {
  std::vector<GroupView> views(inst.n_groups);
  for (std::size_t n = 0; n < inst.n_arms(); ++n) {
    GroupView& v = views[inst.group_of[n]];
    v.arms.push_back(&inst.arms[n]);
    v.keys.push_back(keys[n]);
    v.states.push_back(states[n]);
    v.indexes.push_back(indexes[n]);
  }
  return views;
}

GroupView upsample_view(const GroupView& v, std::size_t target, std::mt19937_64& rng) {
  GroupView out;
  for (std::size_t i : upsample_indices(v.arms.size(), target, rng)) {
    out.arms.push_back(v.arms[i]);
    out.keys.push_back(v.keys[i]);
    out.states.push_back(v.states[i]);
    out.indexes.push_back(v.indexes[i]);
  }
  return out;
}

}  // namespace

AllocationResult plan_allocation(PolicyKind kind, const GroupedInstance& instance,
                                 std::span<const std::size_t> states, int remaining,
                                 std::span<const double> indexes,
                                 std::span<const std::uint64_t> fingerprints, ChargeRule rule,
                                 std::mt19937_64& upsample_rng, PlanDiagnostics* diagnostics) {
  if (!needs_allocation(kind))
    throw Error(ErrorKind::InvalidArgument,
                std::string(to_string(kind)) + " does not use a group allocation");
  const std::vector<int> sizes = instance.group_sizes();
  const std::vector<GroupView> views = group_views(instance, states, indexes, fingerprints);

  if (kind == PolicyKind::MMR || kind == PolicyKind::MNW) {
    LagrangeOracle oracle(views, remaining, rule);
    AllocationResult result = kind == PolicyKind::MMR
                                  ? allocate_mmr(sizes, instance.total_budget, oracle)
                                  : allocate_mnw(sizes, instance.total_budget, oracle);
    if (diagnostics) diagnostics->oracle_evaluations = oracle.evaluations();
    return result;
  }

  const int theta = *std::max_element(sizes.begin(), sizes.end());
  std::vector<GroupView> upsampled;
  upsampled.reserve(views.size());
  for (const GroupView& v : views)
    upsampled.push_back(upsample_view(v, static_cast<std::size_t>(theta), upsample_rng));

  LagrangeOracle oracle(upsampled, remaining, rule);
  AllocationResult result =
      allocate_mnw_equalized(sizes, theta, instance.total_budget, oracle);

  if (diagnostics) {
    diagnostics->oracle_evaluations = oracle.evaluations();
    LagrangeOracle original(views, remaining, rule);
    double gap_sum = 0.0;
    int counted = 0;
    for (std::size_t g = 0; g < views.size(); ++g) {
      if (sizes[g] == theta || result.budgets[g] == 0) continue;
      const double scale = static_cast<double>(theta) / sizes[g];
      const int scaled_budget =
          std::min(theta, static_cast<int>(std::lround(scale * result.budgets[g])));
      gap_sum += conjecture_gap(original.value(g, result.budgets[g]),
                                oracle.value(g, scaled_budget), scale);
      ++counted;
    }
    diagnostics->conjecture_gap = counted ? gap_sum / counted : 0.0;
  }
  return result;
}

}  // namespace ermab
