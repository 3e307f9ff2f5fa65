#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "ermab/cli/config.hpp"
#include "ermab/cli/results_io.hpp"
#include "ermab/simulation.hpp"

namespace ermab::cli {

/// Episode seed k of a config: base_seed + k.
std::uint64_t episode_seed(const ExperimentConfig& config, int k);

struct GridResult {
  /// Policy-major, then seed order, independent of the number of jobs.
  std::vector<SimulationRecord> records;
  std::vector<InstanceEntry> instances;
};

/// Runs every (policy, seed) cell of the config at one budget and alpha.
/// Cells run on up to `jobs` threads.
GridResult run_grid(const ExperimentConfig& config, int budget, double alpha, int jobs);

/// Records of one policy, in seed order.
std::vector<SimulationRecord> records_of(const std::vector<SimulationRecord>& records,
                                         PolicyKind policy);

// Subcommands. Each writes its files plus manifest.json into `out_dir` and
// returns the manifest it wrote.
Manifest cmd_run(const ExperimentConfig& config, const std::filesystem::path& out_dir, int jobs);
Manifest cmd_pareto(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                    int jobs);
Manifest cmd_capacity(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                      int jobs);

/// Crossing budget: the smallest budget whose level meets the target.
std::optional<int> crossing_budget(const std::vector<CapacityRow>& curve, double target);

void print_domains(std::ostream& out);

}  // namespace ermab::cli
