#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ermab/arm_model.hpp"

namespace ermab {

// ---------------------------------------------------------------------------
// Synthetic: five groups of two-state arms, reward r(0)=0, r(1)=1.

/// p(s, a, 1) for one group, indexed [s][a].
using TwoStateParams = std::array<std::array<double, 2>, 2>;

struct SyntheticSpec {
  int n_arms = 100;
  int budget = 20;
  int horizon = 20;
  std::array<double, 5> group_fracs{0.25, 0.25, 0.05, 0.25, 0.20};
  std::array<TwoStateParams, 5> params = default_params();
  std::size_t start_state = 0;

  static std::array<TwoStateParams, 5> default_params();
};

GroupedInstance build_synthetic(const SyntheticSpec& spec);

/// Two-state arm with r = (0, 1) from p(s, a, 1).
ArmModel two_state_arm(const TwoStateParams& p_to_one, std::size_t group);

// ---------------------------------------------------------------------------
// Maternal Health: three states (Self-motivated, Persuadable, Lost Cause) with
// rewards (1, 0.5, 0) and adjacent-only transitions.

/// The six free transition probabilities of a maternal arm. The rest of
/// every row's mass goes to state 1.
struct MaternalParams {
  double p000 = 0.5;   ///< p(0,0,0)
  double p010 = 0.5;   ///< p(0,1,0)
  double p102 = 0.75;  ///< p(1,0,2)
  double p110 = 0.75;  ///< p(1,1,0)
  double p202 = 0.60;  ///< p(2,0,2)
  double p212 = 0.60;  ///< p(2,1,2)
};

struct MaternalSpec {
  int n_arms = 200;
  int budget = 60;
  int horizon = 20;
  std::size_t large_group = 0;  ///< group holding 60% of arms; the others get 20%
  std::array<MaternalParams, 3> params = default_params();
  double noise_scale = 0.2;
  std::size_t start_state = 1;

  static std::array<MaternalParams, 3> default_params();
};

ArmModel maternal_arm(const MaternalParams& p, std::size_t group);

/// Per-arm probabilities are drawn around the group means from
/// N(mean, noise_scale * min(mean, 1 - mean)), clamped to [1e-6, 1 - 1e-6].
GroupedInstance build_maternal(const MaternalSpec& spec, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Digital Diabetes: engagement x clinical x two-slot engagement memory.

enum class Engagement : std::uint8_t { Engaged = 0, Maintenance = 1, Dropout = 2 };
enum class Clinical : std::uint8_t { Low = 0 /* A1c < 8 */, High = 1 /* A1c >= 8 */ };

struct DiabetesState {
  Engagement engagement = Engagement::Maintenance;
  Clinical clinical = Clinical::High;
  Engagement memory0 = Engagement::Maintenance;  ///< engagement one round ago
  Engagement memory1 = Engagement::Maintenance;  ///< engagement two rounds ago

  friend bool operator==(const DiabetesState&, const DiabetesState&) = default;
};

inline constexpr std::size_t kDiabetesStates = 54;

std::size_t encode(const DiabetesState& s);
DiabetesState decode(std::size_t index);

/// One row of the diabetes group parameter table.
struct DiabetesGroupParams {
  double p_act_m_to_e = 0;        ///< intervention: Maintenance -> Engaged
  double p_act_m_to_d = 0;        ///< intervention: Maintenance -> Dropout
  double p_act_e_to_e = 0;        ///< intervention: Engaged -> Engaged
  double p_pass_m_to_d = 0;       ///< no intervention: Maintenance -> Dropout
  double p_low_unengaged_high = 0;  ///< P(A1c<8 next | not engaged 2 rounds ago, A1c>=8)
  double p_low_unengaged_low = 0;   ///< P(A1c<8 next | not engaged 2 rounds ago, A1c<8)
  double p_low_engaged_high = 0;    ///< P(A1c<8 next | engaged 2 rounds ago, A1c>=8)
  double p_low_engaged_low = 0;     ///< P(A1c<8 next | engaged 2 rounds ago, A1c<8)
  double frac = 0;
  std::string sex;
  std::string age;
  friend bool operator==(const DiabetesGroupParams&, const DiabetesGroupParams&) = default;
};

using DiabetesGroupTable = std::vector<DiabetesGroupParams>;

struct DiabetesSpec {
  double alpha = 0.5;
  int n_arms = 300;
  int budget = 75;
  int horizon = 20;
  DiabetesGroupTable group_table = default_diabetes_table();
  DiabetesState start_state{};

  static DiabetesGroupTable default_diabetes_table();
};

/// Engagement transition distribution over (Engaged, Maintenance, Dropout).
std::array<double, 3> engagement_kernel(const DiabetesGroupParams& p, Engagement from, int action);

/// Probability that next round's clinical state is A1c < 8.
double clinical_low_probability(const DiabetesGroupParams& p, Clinical current,
                                Engagement two_rounds_ago);

ArmModel diabetes_arm(const DiabetesGroupParams& p, double alpha, std::size_t group);
StateAnnotations diabetes_annotations();
GroupedInstance build_diabetes(const DiabetesSpec& spec);

/// Column names of the group table file, in order.
const std::array<std::string, 11>& group_table_columns();

/// Parses and validates a comma-separated group table (header + 6 rows).
DiabetesGroupTable parse_group_table(std::istream& in);
DiabetesGroupTable load_group_table(const std::filesystem::path& path);
void write_group_table(std::ostream& out, const DiabetesGroupTable& table);
void validate_group_table(const DiabetesGroupTable& table);

// ---------------------------------------------------------------------------

/// Sizes by flooring frac * n, with the residual added to group 0.
std::vector<int> group_sizes_from_fracs(std::span<const double> fracs, int n_arms);

}  // namespace ermab
