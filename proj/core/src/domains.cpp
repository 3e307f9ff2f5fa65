#include "ermab/domains.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "ermab/errors.hpp"
#include "ermab/rng.hpp"

namespace ermab {

std::vector<int> group_sizes_from_fracs(std::span<const double> fracs, int n_arms) {
  if (fracs.empty()) throw Error(ErrorKind::InvalidArgument, "no groups");
  const double total = std::accumulate(fracs.begin(), fracs.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-6)
    throw Error(ErrorKind::BadProbability, "group fractions sum to " + std::to_string(total));
  std::vector<int> sizes;
  int assigned = 0;
  for (double f : fracs) {
    if (f < 0.0) throw Error(ErrorKind::BadProbability, "negative group fraction");
    // Nudge so that e.g. 0.05 * 100 floors to 5, not 4.
    sizes.push_back(static_cast<int>(std::floor(f * n_arms + 1e-9)));
    assigned += sizes.back();
  }
  sizes[0] += n_arms - assigned;
  for (std::size_t g = 0; g < sizes.size(); ++g)
    if (sizes[g] <= 0)
      throw Error(ErrorKind::InvalidArgument,
                  "group " + std::to_string(g) + " is empty with N=" + std::to_string(n_arms));
  return sizes;
}

namespace {

GroupedInstance assemble(std::vector<ArmModel> arms, std::size_t n_groups, int horizon,
                         int budget, std::vector<std::size_t> start) {
  GroupedInstance inst;
  inst.n_groups = n_groups;
  inst.horizon = horizon;
  inst.total_budget = budget;
  for (const auto& arm : arms) inst.group_of.push_back(arm.group_id());
  inst.arms = std::move(arms);
  inst.start_states = std::move(start);
  validate_instance(inst);
  return inst;
}

}  // namespace

// ---------------------------------------------------------------------------
// Synthetic

std::array<TwoStateParams, 5> SyntheticSpec::default_params() {
  // [s][a] -> p(s, a, 1)
  return {{
      {{{0.05, 0.99}, {0.35, 0.99}}},  // A
      {{{0.05, 0.95}, {0.10, 0.95}}},  // B
      {{{0.05, 0.90}, {0.05, 0.90}}},  // C
      {{{0.40, 0.40}, {0.40, 0.40}}},  // D
      {{{0.40, 0.40}, {0.40, 0.40}}},  // E
  }};
}

ArmModel two_state_arm(const TwoStateParams& p_to_one, std::size_t group) {
  std::vector<double> t(2 * kNumActions * 2);
  ArmModel arm(2, std::move(t), {0.0, 1.0}, group);
  for (std::size_t s = 0; s < 2; ++s)
    for (int a = 0; a < kNumActions; ++a) {
      arm.p(s, a, 1) = p_to_one[s][static_cast<std::size_t>(a)];
      arm.p(s, a, 0) = 1.0 - p_to_one[s][static_cast<std::size_t>(a)];
    }
  return validate_arm(arm);
}

GroupedInstance build_synthetic(const SyntheticSpec& spec) {
  const auto sizes = group_sizes_from_fracs(spec.group_fracs, spec.n_arms);
  std::vector<ArmModel> arms;
  for (std::size_t g = 0; g < sizes.size(); ++g) {
    const ArmModel proto = two_state_arm(spec.params[g], g);
    for (int i = 0; i < sizes[g]; ++i) arms.push_back(proto);
  }
  std::vector<std::size_t> start(arms.size(), spec.start_state);
  return assemble(std::move(arms), sizes.size(), spec.horizon, spec.budget, std::move(start));
}

// ---------------------------------------------------------------------------
// Maternal Health

std::array<MaternalParams, 3> MaternalSpec::default_params() {
  return {{
      {0.5, 0.5, 0.75, 0.75, 0.60, 0.60},  // A
      {0.5, 0.5, 0.60, 0.40, 0.60, 0.60},  // B
      {0.5, 0.5, 0.60, 0.25, 0.60, 0.60},  // C
  }};
}

ArmModel maternal_arm(const MaternalParams& p, std::size_t group) {
  ArmModel arm(3, std::vector<double>(3 * kNumActions * 3, 0.0), {1.0, 0.5, 0.0}, group);
  arm.p(0, 0, 0) = p.p000;
  arm.p(0, 0, 1) = 1.0 - p.p000;
  arm.p(0, 1, 0) = p.p010;
  arm.p(0, 1, 1) = 1.0 - p.p010;
  arm.p(1, 0, 2) = p.p102;
  arm.p(1, 0, 1) = 1.0 - p.p102;
  arm.p(1, 1, 0) = p.p110;
  arm.p(1, 1, 1) = 1.0 - p.p110;
  arm.p(2, 0, 2) = p.p202;
  arm.p(2, 0, 1) = 1.0 - p.p202;
  arm.p(2, 1, 2) = p.p212;
  arm.p(2, 1, 1) = 1.0 - p.p212;
  return validate_arm(arm);
}

GroupedInstance build_maternal(const MaternalSpec& spec, std::uint64_t seed) {
  if (spec.large_group > 2) throw Error(ErrorKind::InvalidArgument, "large_group must be 0..2");
  if (spec.noise_scale < 0.0) throw Error(ErrorKind::InvalidArgument, "negative noise scale");
  std::array<double, 3> fracs{0.2, 0.2, 0.2};
  fracs[spec.large_group] = 0.6;
  const auto sizes = group_sizes_from_fracs(fracs, spec.n_arms);

  auto rng = make_stream(seed, StreamPurpose::DomainBuild);
  auto draw = [&](double mean) {
    const double sd = spec.noise_scale * std::min(mean, 1.0 - mean);
    if (sd <= 0.0) return mean;
    std::normal_distribution<double> normal(mean, sd);
    return std::clamp(normal(rng), 1e-6, 1.0 - 1e-6);
  };

  std::vector<ArmModel> arms;
  for (std::size_t g = 0; g < sizes.size(); ++g) {
    const MaternalParams& m = spec.params[g];
    for (int i = 0; i < sizes[g]; ++i) {
      MaternalParams p{draw(m.p000), draw(m.p010), draw(m.p102),
                       draw(m.p110), draw(m.p202), draw(m.p212)};
      arms.push_back(maternal_arm(p, g));
    }
  }
  std::vector<std::size_t> start(arms.size(), spec.start_state);
  return assemble(std::move(arms), sizes.size(), spec.horizon, spec.budget, std::move(start));
}

// ---------------------------------------------------------------------------
// Digital Diabetes

DiabetesGroupTable DiabetesSpec::default_diabetes_table() {
  return {
      {0.560, 0.03, 0.99, 0.122, 0.071, 0.992, 0.089, 0.994, 0.175, "1", "30-44"},
      {0.783, 0.03, 0.99, 0.093, 0.074, 0.990, 0.111, 0.995, 0.150, "1", "45-54"},
      {0.907, 0.03, 0.99, 0.077, 0.080, 0.993, 0.140, 0.998, 0.200, "1", "55-64"},
      {0.560, 0.03, 0.99, 0.122, 0.069, 0.992, 0.087, 0.994, 0.150, "2", "30-44"},
      {0.783, 0.03, 0.99, 0.093, 0.070, 0.993, 0.104, 0.996, 0.125, "2", "45-54"},
      {0.907, 0.03, 0.99, 0.077, 0.085, 0.995, 0.148, 0.999, 0.200, "2", "55-64"},
  };
}

std::size_t encode(const DiabetesState& s) {
  return ((static_cast<std::size_t>(s.engagement) * 2 + static_cast<std::size_t>(s.clinical)) * 3 +
          static_cast<std::size_t>(s.memory0)) *
             3 +
         static_cast<std::size_t>(s.memory1);
}

DiabetesState decode(std::size_t index) {
  if (index >= kDiabetesStates) throw Error(ErrorKind::InvalidArgument, "diabetes state index");
  DiabetesState s;
  s.memory1 = static_cast<Engagement>(index % 3);
  index /= 3;
  s.memory0 = static_cast<Engagement>(index % 3);
  index /= 3;
  s.clinical = static_cast<Clinical>(index % 2);
  s.engagement = static_cast<Engagement>(index / 2);
  return s;
}

std::array<double, 3> engagement_kernel(const DiabetesGroupParams& p, Engagement from,
                                        int action) {
  switch (from) {
    case Engagement::Engaged:
      if (action == 1) return {p.p_act_e_to_e, 1.0 - p.p_act_e_to_e, 0.0};
      return {0.0, 1.0, 0.0};
    case Engagement::Maintenance:
      if (action == 1)
        return {p.p_act_m_to_e, 1.0 - p.p_act_m_to_e - p.p_act_m_to_d, p.p_act_m_to_d};
      return {0.0, 1.0 - p.p_pass_m_to_d, p.p_pass_m_to_d};
    case Engagement::Dropout:
      return {0.0, 0.0, 1.0};
  }
  return {0.0, 0.0, 1.0};
}

double clinical_low_probability(const DiabetesGroupParams& p, Clinical current,
                                Engagement two_rounds_ago) {
  const bool engaged = two_rounds_ago == Engagement::Engaged;
  if (current == Clinical::High) return engaged ? p.p_low_engaged_high : p.p_low_unengaged_high;
  return engaged ? p.p_low_engaged_low : p.p_low_unengaged_low;
}

StateAnnotations diabetes_annotations() {
  StateAnnotations ann;
  for (std::size_t i = 0; i < kDiabetesStates; ++i) {
    const DiabetesState s = decode(i);
    const double r_e = s.engagement == Engagement::Dropout ? 0.0 : 1.0;
    const double r_c = s.clinical == Clinical::Low ? 1.0 : 0.0;
    ann.high_risk.push_back(s.clinical == Clinical::High);
    ann.dropout.push_back(s.engagement == Engagement::Dropout);
    ann.engagement_reward.push_back(r_e);
    ann.clinical_reward.push_back(r_c);
  }
  return ann;
}

ArmModel diabetes_arm(const DiabetesGroupParams& p, double alpha, std::size_t group) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw Error(ErrorKind::InvalidArgument, "alpha must lie in [0, 1]");
  const StateAnnotations ann = diabetes_annotations();
  std::vector<double> rewards(kDiabetesStates);
  for (std::size_t i = 0; i < kDiabetesStates; ++i)
    rewards[i] = alpha * ann.engagement_reward[i] + (1.0 - alpha) * ann.clinical_reward[i];

  ArmModel arm(kDiabetesStates, std::vector<double>(kDiabetesStates * kNumActions * kDiabetesStates),
               std::move(rewards), group);
  for (std::size_t i = 0; i < kDiabetesStates; ++i) {
    const DiabetesState s = decode(i);
    const double p_low = clinical_low_probability(p, s.clinical, s.memory1);
    const std::array<double, 2> clinical{p_low, 1.0 - p_low};
    for (int a = 0; a < kNumActions; ++a) {
      const auto eng = engagement_kernel(p, s.engagement, a);
      for (std::size_t e = 0; e < 3; ++e) {
        for (std::size_t c = 0; c < 2; ++c) {
          const DiabetesState next{static_cast<Engagement>(e), static_cast<Clinical>(c),
                                   s.engagement, s.memory0};
          arm.p(i, a, encode(next)) = eng[e] * clinical[c];
        }
      }
    }
  }
  return validate_arm(arm);
}

GroupedInstance build_diabetes(const DiabetesSpec& spec) {
  validate_group_table(spec.group_table);
  std::vector<double> fracs;
  for (const auto& row : spec.group_table) fracs.push_back(row.frac);
  const auto sizes = group_sizes_from_fracs(fracs, spec.n_arms);

  std::vector<ArmModel> arms;
  for (std::size_t g = 0; g < sizes.size(); ++g) {
    const ArmModel proto = diabetes_arm(spec.group_table[g], spec.alpha, g);
    for (int i = 0; i < sizes[g]; ++i) arms.push_back(proto);
  }
  std::vector<std::size_t> start(arms.size(), encode(spec.start_state));
  GroupedInstance inst =
      assemble(std::move(arms), sizes.size(), spec.horizon, spec.budget, std::move(start));
  inst.annotations = diabetes_annotations();
  return inst;
}

// ---------------------------------------------------------------------------
// Group table file

const std::array<std::string, 11>& group_table_columns() {
  static const std::array<std::string, 11> cols = {
      "p_I_MtoE",      "p_I_MtoD",      "p_I_EtoE",   "p_U_MtoD", "p_notE_A1c_ge8", "p_notE_A1c_lt8",
      "p_E_A1c_ge8",   "p_E_A1c_lt8",   "frac",       "sex",      "age"};
  return cols;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& cell, std::size_t row, std::size_t col) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != cell.size())
    throw Error(ErrorKind::ParseError, "row " + std::to_string(row) + ", column " +
                                           std::to_string(col) + ": '" + cell + "'");
  return v;
}

}  // namespace

void validate_group_table(const DiabetesGroupTable& table) {
  if (table.empty()) throw Error(ErrorKind::ParseError, "group table has no rows");
  double frac_sum = 0.0;
  for (std::size_t r = 0; r < table.size(); ++r) {
    const auto& p = table[r];
    for (double v : {p.p_act_m_to_e, p.p_act_m_to_d, p.p_act_e_to_e, p.p_pass_m_to_d,
                     p.p_low_unengaged_high, p.p_low_unengaged_low, p.p_low_engaged_high,
                     p.p_low_engaged_low, p.frac})
      if (!(v >= 0.0 && v <= 1.0))
        throw Error(ErrorKind::BadProbability,
                    "row " + std::to_string(r) + ": value " + std::to_string(v));
    if (p.p_act_m_to_e + p.p_act_m_to_d > 1.0 + 1e-12)
      throw Error(ErrorKind::BadProbability,
                  "row " + std::to_string(r) + ": p_I_MtoE + p_I_MtoD exceeds 1");
    frac_sum += p.frac;
  }
  if (std::abs(frac_sum - 1.0) > 1e-6)
    throw Error(ErrorKind::BadProbability, "group fractions sum to " + std::to_string(frac_sum));
}

DiabetesGroupTable parse_group_table(std::istream& in) {
  const auto& cols = group_table_columns();
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::ParseError, "empty group table");
  const auto header = split_csv(line);
  if (header.size() != cols.size())
    throw Error(ErrorKind::ParseError, "header has " + std::to_string(header.size()) +
                                           " columns, expected " + std::to_string(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c)
    if (header[c] != cols[c])
      throw Error(ErrorKind::ParseError, "header column " + std::to_string(c) + " is '" +
                                             header[c] + "', expected '" + cols[c] + "'");

  DiabetesGroupTable table;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++row;
    const auto cells = split_csv(line);
    if (cells.size() != cols.size())
      throw Error(ErrorKind::ParseError, "row " + std::to_string(row) + ", column " +
                                             std::to_string(std::min(cells.size(), cols.size())) +
                                             ": expected " + std::to_string(cols.size()) +
                                             " columns");
    DiabetesGroupParams p;
    double* numeric[] = {&p.p_act_m_to_e,         &p.p_act_m_to_d,        &p.p_act_e_to_e,
                         &p.p_pass_m_to_d,        &p.p_low_unengaged_high, &p.p_low_unengaged_low,
                         &p.p_low_engaged_high,   &p.p_low_engaged_low,    &p.frac};
    for (std::size_t c = 0; c < 9; ++c) *numeric[c] = parse_number(cells[c], row, c);
    p.sex = cells[9];
    p.age = cells[10];
    table.push_back(std::move(p));
  }
  if (table.size() != 6)
    throw Error(ErrorKind::ParseError,
                "expected 6 data rows, found " + std::to_string(table.size()));
  validate_group_table(table);
  return table;
}

DiabetesGroupTable load_group_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  return parse_group_table(in);
}

void write_group_table(std::ostream& out, const DiabetesGroupTable& table) {
  const auto& cols = group_table_columns();
  for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c];
  out << '\n';
  char buf[32];
  for (const auto& p : table) {
    for (double v : {p.p_act_m_to_e, p.p_act_m_to_d, p.p_act_e_to_e, p.p_pass_m_to_d,
                     p.p_low_unengaged_high, p.p_low_unengaged_low, p.p_low_engaged_high,
                     p.p_low_engaged_low, p.frac}) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      out << buf << ',';
    }
    out << p.sex << ',' << p.age << '\n';
  }
}

}  // namespace ermab
