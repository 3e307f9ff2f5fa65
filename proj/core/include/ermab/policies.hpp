#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ermab/allocation.hpp"
#include "ermab/arm_model.hpp"
#include "ermab/whittle.hpp"

namespace ermab {

enum class PolicyKind { NoAct, Random, Opt, MMR, MNW, MNWEG, HRRR, HRRand };

std::string_view to_string(PolicyKind kind);
/// Accepts the display names ("NoAct", "MNW-EG", "HR-RR", ...) case-insensitively.
std::optional<PolicyKind> parse_policy_kind(std::string_view name);
std::span<const PolicyKind> all_policy_kinds();

constexpr bool needs_allocation(PolicyKind k) {
  return k == PolicyKind::MMR || k == PolicyKind::MNW || k == PolicyKind::MNWEG;
}
constexpr bool needs_indexes(PolicyKind k) { return k == PolicyKind::Opt || needs_allocation(k); }
constexpr bool needs_clinical_flag(PolicyKind k) {
  return k == PolicyKind::HRRR || k == PolicyKind::HRRand;
}

struct PolicySpec {
  PolicyKind kind = PolicyKind::NoAct;
  bool realloc_every_round = true;
  double precision = kDefaultPrecision;
  ChargeRule charge_rule = ChargeRule::Envelope;
};

/// Arms acted on in one round, ascending.
struct ActionVector {
  std::vector<std::size_t> acted;
};

/// Round at which each arm was last acted on; nullopt means never.
using ActHistory = std::vector<std::optional<int>>;

/// Everything select_actions reads for one round.
struct RoundContext {
  const GroupedInstance* instance = nullptr;
  std::span<const std::size_t> states;
  int t = 0;
  std::span<const double> indexes;           ///< required for Opt / MMR / MNW / MNW-EG
  const AllocationResult* allocation = nullptr;
  std::span<const std::optional<int>> last_acted;  ///< required for HR-RR
  std::mt19937_64* rng = nullptr;            ///< required for Random / HR-Rand
};

ActionVector select_actions(const PolicySpec& policy, const RoundContext& round);

/// Indices of the `count` largest scores among `candidates`, ties to the
/// smaller arm index. Result ascending.
std::vector<std::size_t> top_by_score(std::span<const std::size_t> candidates,
                                      std::span<const double> scores, std::size_t count);

/// Throws unless |acted| <= B and, when an allocation is given, every group
/// stays within its budget.
void check_feasible(const GroupedInstance& instance, const ActionVector& actions,
                    const AllocationResult* allocation);

/// Diagnostics from one allocation call.
struct PlanDiagnostics {
  std::size_t oracle_evaluations = 0;
  /// Mean relative conjecture gap across groups (MNW-EG only, NaN otherwise).
  double conjecture_gap = std::numeric_limits<double>::quiet_NaN();
};

/// Solves the outer allocation for MMR / MNW / MNW-EG on the current states
/// with Whittle-to-Lagrange group values. `indexes` are the per-arm indexes at
/// `states` with `remaining` rounds to go; `fingerprints` identify arm
/// dynamics so identical arms share value iterations. MNW-EG draws its
/// upsampled members from `upsample_rng`.
AllocationResult plan_allocation(PolicyKind kind, const GroupedInstance& instance,
                                 std::span<const std::size_t> states, int remaining,
                                 std::span<const double> indexes,
                                 std::span<const std::uint64_t> fingerprints, ChargeRule rule,
                                 std::mt19937_64& upsample_rng,
                                 PlanDiagnostics* diagnostics = nullptr);

}  // namespace ermab
