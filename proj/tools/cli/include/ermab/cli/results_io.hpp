#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ermab/cli/config.hpp"
#include "ermab/simulation.hpp"

namespace ermab::cli {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kCapacityMetric =
    "mean over seeds of (sum of all arms' rewards in round H-1) / N";

/// Plain comma-separated table; cells never contain commas.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  friend bool operator==(const CsvTable&, const CsvTable&) = default;
};
void write_csv(std::ostream& out, const CsvTable& table);
CsvTable parse_csv(std::istream& in);
/// Shortest text that parses back to the same double.
std::string format_double(double v);
double parse_double(const std::string& cell, std::size_t row, const std::string& column);

// records.csv: seed, policy, group, group_size, group_total_reward
struct RecordRow {
  std::uint64_t seed = 0;
  std::string policy;
  std::size_t group = 0;
  int group_size = 0;
  double group_total_reward = 0.0;
  friend bool operator==(const RecordRow&, const RecordRow&) = default;
};
std::vector<RecordRow> record_rows(const std::vector<SimulationRecord>& records);
CsvTable to_table(const std::vector<RecordRow>& rows);
std::vector<RecordRow> record_rows_from(const CsvTable& table);

// pareto_records.csv: the records table plus alpha and the reward split
struct ParetoRecordRow {
  double alpha = 0.0;
  RecordRow record;
  double group_engagement_reward = 0.0;
  double group_clinical_reward = 0.0;
  friend bool operator==(const ParetoRecordRow&, const ParetoRecordRow&) = default;
};
std::vector<ParetoRecordRow> pareto_record_rows(double alpha,
                                                const std::vector<SimulationRecord>& records);
CsvTable to_table(const std::vector<ParetoRecordRow>& rows);
std::vector<ParetoRecordRow> pareto_record_rows_from(const CsvTable& table);

// pareto.csv: one row per (alpha, policy)
struct ParetoRow {
  double alpha = 0.0;
  std::string policy;
  int seeds = 0;
  double engagement_mean = 0.0, engagement_stderr = 0.0;  ///< per arm per episode
  double clinical_mean = 0.0, clinical_stderr = 0.0;
  double reward_mean = 0.0, reward_stderr = 0.0;
  friend bool operator==(const ParetoRow&, const ParetoRow&) = default;
};
CsvTable to_table(const std::vector<ParetoRow>& rows);
std::vector<ParetoRow> pareto_rows_from(const CsvTable& table);

// capacity.csv: one row per (policy, budget)
struct CapacityRow {
  std::string policy;
  int budget = 0;
  double level_mean = 0.0, level_stderr = 0.0;
  friend bool operator==(const CapacityRow&, const CapacityRow&) = default;
};
CsvTable to_table(const std::vector<CapacityRow>& rows);
std::vector<CapacityRow> capacity_rows_from(const CsvTable& table);

struct PolicySummary {
  std::string policy;
  std::size_t n_records = 0;
  double reward_mean = 0.0, reward_stderr = 0.0;  ///< total reward / N
  double gini_mean = 0.0, gini_stderr = 0.0;
  std::vector<double> per_group_average;
  std::vector<double> per_group_mean_budget;  ///< empty for non-allocating policies
  double conjecture_gap = 0.0;                ///< mean over seeds (MNW-EG only)
  friend bool operator==(const PolicySummary&, const PolicySummary&) = default;
};
PolicySummary summarize(const std::vector<SimulationRecord>& records);
Json to_json(const PolicySummary& s);
PolicySummary policy_summary_from(const Json& j);

struct RunSummary {
  std::vector<PolicySummary> policies;
  friend bool operator==(const RunSummary&, const RunSummary&) = default;
};
Json to_json(const RunSummary& s);
RunSummary run_summary_from(const Json& j);

struct CapacityCurve {
  std::string policy;
  std::vector<CapacityRow> points;
  std::optional<int> crossing_budget;  ///< nullopt: "not reached"
  friend bool operator==(const CapacityCurve&, const CapacityCurve&) = default;
};
struct CapacitySummary {
  double target = 0.0;
  std::vector<CapacityCurve> curves;
  friend bool operator==(const CapacitySummary&, const CapacitySummary&) = default;
};
Json to_json(const CapacitySummary& s);
CapacitySummary capacity_summary_from(const Json& j);

struct InstanceEntry {
  std::uint64_t seed = 0;
  int budget = 0;
  double alpha = 0.0;
  std::uint64_t hash = 0;
  friend bool operator==(const InstanceEntry&, const InstanceEntry&) = default;
};

struct Manifest {
  std::string command;
  ExperimentConfig config;
  std::vector<InstanceEntry> instances;
  std::map<std::string, std::string> files;  ///< role -> file name in the output dir
  friend bool operator==(const Manifest&, const Manifest&) = default;
};
Json to_json(const Manifest& m);
Manifest manifest_from(const Json& j);

/// Throws Error(ParseError) unless the document's schema_version matches.
void check_schema(const Json& j);

// File helpers; writes go through a temporary and a rename.
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);
std::string dump(const Json& j);

}  // namespace ermab::cli
