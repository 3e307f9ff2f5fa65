#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ermab/arm_model.hpp"
#include "ermab/domains.hpp"
#include "ermab/policies.hpp"
#include "json.hpp"

namespace ermab::cli {

using Json = nlohmann::ordered_json;

enum class Domain { Synthetic, Maternal, Diabetes };

std::string_view to_string(Domain d);
std::optional<Domain> parse_domain(std::string_view name);

struct DomainInfo {
  Domain domain;
  std::string_view name;
  std::string_view description;
  int default_arms, default_budget, default_horizon;
};
const std::vector<DomainInfo>& domain_catalog();

struct CapacitySweep {
  std::vector<int> budgets;  ///< ascending
  double target = 0.0;       ///< mean final-round reward per arm
  friend bool operator==(const CapacitySweep&, const CapacitySweep&) = default;
};

struct ExperimentConfig {
  Domain domain = Domain::Synthetic;
  int n_arms = 100;
  int budget = 20;
  int horizon = 20;
  std::vector<PolicyKind> policies;
  int seeds = 1;
  std::uint64_t base_seed = 0;
  double precision = kDefaultPrecision;
  bool realloc_every_round = true;
  ChargeRule charge_rule = ChargeRule::Envelope;
  std::string output_dir;  ///< empty: decided by the caller

  std::optional<std::size_t> start_state;  ///< domain default when unset

  // Synthetic
  std::vector<double> group_fracs;  ///< empty: domain default

  // Maternal
  std::size_t large_group = 0;
  double noise_scale = 0.2;

  // Diabetes
  double alpha = 0.5;
  std::vector<double> alphas;          ///< pareto sweep
  DiabetesGroupTable group_table;      ///< always filled for diabetes after parsing

  std::optional<CapacitySweep> capacity;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Parses and validates a config document. A manifest written by this tool is
/// accepted too (its "config" member is used). Relative group-table paths are
/// resolved against `base_dir`. Throws Error(ConfigError) listing every
/// offending field path.
ExperimentConfig parse_config(const Json& doc, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Normalized, self-contained form (group table inlined); parse_config inverts it.
Json to_json(const ExperimentConfig& config);

/// Field-path problems with a config; empty when valid.
std::vector<std::string> validation_errors(const ExperimentConfig& config);

/// Builds the instance for one seed (only Maternal depends on the seed) at the
/// given budget and alpha.
GroupedInstance build_instance(const ExperimentConfig& config, std::uint64_t seed, int budget,
                               double alpha);
bool instance_depends_on_seed(const ExperimentConfig& config);

/// Stable hash of arm dynamics, group map, horizon, budget and start states.
std::uint64_t instance_hash(const GroupedInstance& instance);

PolicySpec policy_spec(const ExperimentConfig& config, PolicyKind kind);

}  // namespace ermab::cli
