#include "ermab/arm_model.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "ermab/errors.hpp"

namespace ermab {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::RowNotStochastic: return "RowNotStochastic";
    case ErrorKind::RewardOutOfRange: return "RewardOutOfRange";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::InstanceTooLarge: return "InstanceTooLarge";
    case ErrorKind::BudgetExceedsGroup: return "BudgetExceedsGroup";
    case ErrorKind::BudgetExceedsArms: return "BudgetExceedsArms";
    case ErrorKind::NonPositiveValue: return "NonPositiveValue";
    case ErrorKind::MissingAllocation: return "MissingAllocation";
    case ErrorKind::DomainLacksClinicalFlag: return "DomainLacksClinicalFlag";
    case ErrorKind::NegativeInput: return "NegativeInput";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::BadProbability: return "BadProbability";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

ArmModel::ArmModel(std::size_t n_states, std::vector<double> transitions,
                   std::vector<double> rewards, std::size_t group_id)
    : n_states_(n_states),
      transitions_(std::move(transitions)),
      rewards_(std::move(rewards)),
      group_id_(group_id) {
  if (n_states_ == 0) throw Error(ErrorKind::InvalidArgument, "arm needs at least one state");
  if (transitions_.size() != n_states_ * kNumActions * n_states_)
    throw Error(ErrorKind::InvalidArgument, "transition tensor has wrong size");
  if (rewards_.size() != n_states_)
    throw Error(ErrorKind::InvalidArgument, "reward vector has wrong size");
}

namespace {

// FNV-1a over the raw bytes.
std::uint64_t hash_bytes(std::uint64_t h, const void* data, std::size_t n) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t ArmModel::fingerprint() const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  h = hash_bytes(h, &n_states_, sizeof(n_states_));
  h = hash_bytes(h, transitions_.data(), transitions_.size() * sizeof(double));
  h = hash_bytes(h, rewards_.data(), rewards_.size() * sizeof(double));
  return h;
}

const ArmModel& validate_arm(const ArmModel& arm) {
  const std::size_t n = arm.n_states();
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "arm has no states");
  for (std::size_t s = 0; s < n; ++s) {
    for (int a = 0; a < kNumActions; ++a) {
      double sum = 0.0;
      for (double p : arm.row(s, a)) {
        if (!(p >= 0.0 && p <= 1.0))
          throw Error(ErrorKind::RowNotStochastic,
                      "entry outside [0,1] at s=" + std::to_string(s) + " a=" + std::to_string(a));
        sum += p;
      }
      if (std::abs(sum - 1.0) > kStochasticTolerance)
        throw Error(ErrorKind::RowNotStochastic, "s=" + std::to_string(s) + " a=" +
                                                     std::to_string(a) +
                                                     " sum=" + std::to_string(sum));
    }
    const double r = arm.reward(s);
    if (!(r >= 0.0 && r <= 1.0))
      throw Error(ErrorKind::RewardOutOfRange, "s=" + std::to_string(s));
  }
  return arm;
}

std::vector<std::size_t> GroupedInstance::members(std::size_t g) const {
  std::vector<std::size_t> out;
  for (std::size_t n = 0; n < group_of.size(); ++n)
    if (group_of[n] == g) out.push_back(n);
  return out;
}

std::vector<int> GroupedInstance::group_sizes() const {
  std::vector<int> sizes(n_groups, 0);
  for (std::size_t g : group_of) ++sizes[g];
  return sizes;
}

void validate_instance(const GroupedInstance& instance) {
  const std::size_t n = instance.arms.size();
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "instance has no arms");
  if (instance.group_of.size() != n || instance.start_states.size() != n)
    throw Error(ErrorKind::InvalidArgument, "group map / start states length mismatch");
  if (instance.horizon <= 0) throw Error(ErrorKind::InvalidArgument, "horizon must be positive");
  if (instance.total_budget < 0 || static_cast<std::size_t>(instance.total_budget) > n)
    throw Error(ErrorKind::BudgetExceedsArms, "budget " + std::to_string(instance.total_budget) +
                                                  " outside [0, " + std::to_string(n) + "]");
  std::vector<int> seen(instance.n_groups, 0);
  for (std::size_t i = 0; i < n; ++i) {
    validate_arm(instance.arms[i]);
    const std::size_t g = instance.group_of[i];
    if (g >= instance.n_groups)
      throw Error(ErrorKind::InvalidArgument, "arm " + std::to_string(i) + " has bad group");
    ++seen[g];
    if (instance.start_states[i] >= instance.arms[i].n_states())
      throw Error(ErrorKind::InvalidArgument, "start state out of range for arm " +
                                                  std::to_string(i));
  }
  for (std::size_t g = 0; g < seen.size(); ++g)
    if (seen[g] == 0)
      throw Error(ErrorKind::InvalidArgument, "group " + std::to_string(g) + " has no arms");
}

}  // namespace ermab
