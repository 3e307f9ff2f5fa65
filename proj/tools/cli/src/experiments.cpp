#include "ermab/cli/experiments.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "ermab/errors.hpp"

namespace ermab::cli {

namespace {

void mean_stderr(const std::vector<double>& xs, double& mean, double& se) {
  const double n = static_cast<double>(xs.size());
  mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  se = xs.size() > 1 ? std::sqrt(ss / (n - 1.0)) / std::sqrt(n) : 0.0;
}

std::string csv_text(const CsvTable& t) {
  std::ostringstream ss;
  write_csv(ss, t);
  return ss.str();
}

void write_manifest(const Manifest& m, const std::filesystem::path& out_dir) {
  write_text_file(out_dir / "manifest.json", dump(to_json(m)));
}

}  // namespace

std::uint64_t episode_seed(const ExperimentConfig& config, int k) {
  return config.base_seed + static_cast<std::uint64_t>(k);
}

GridResult run_grid(const ExperimentConfig& config, int budget, double alpha, int jobs) {
  if (const auto errors = validation_errors(config); !errors.empty()) {
    std::string msg;
    for (const auto& e : errors) msg += (msg.empty() ? "" : "\n") + e;
    throw Error(ErrorKind::ConfigError, msg);
  }
  const bool per_seed = instance_depends_on_seed(config);
  const int n_instances = per_seed ? config.seeds : 1;

  GridResult result;
  std::vector<GroupedInstance> instances;
  instances.reserve(static_cast<std::size_t>(n_instances));
  for (int k = 0; k < n_instances; ++k)
    instances.push_back(build_instance(config, episode_seed(config, k), budget, alpha));
  for (int k = 0; k < config.seeds; ++k) {
    const auto& inst = instances[per_seed ? static_cast<std::size_t>(k) : 0];
    result.instances.push_back({episode_seed(config, k), budget, alpha, instance_hash(inst)});
  }

  const std::size_t n_policies = config.policies.size();
  const std::size_t n_seeds = static_cast<std::size_t>(config.seeds);
  const std::size_t n_cells = n_policies * n_seeds;
  result.records.resize(n_cells);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t cell; (cell = next.fetch_add(1)) < n_cells;) {
      const std::size_t p = cell / n_seeds;
      const std::size_t k = cell % n_seeds;
      try {
        const auto& inst = instances[per_seed ? k : 0];
        result.records[cell] = run_episode(inst, policy_spec(config, config.policies[p]),
                                           episode_seed(config, static_cast<int>(k)));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(n_cells);
      }
    }
  };
  const std::size_t n_threads =
      std::min<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), n_cells);
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return result;
}

std::vector<SimulationRecord> records_of(const std::vector<SimulationRecord>& records,
                                         PolicyKind policy) {
  std::vector<SimulationRecord> out;
  for (const auto& r : records)
    if (r.policy == policy) out.push_back(r);
  return out;
}

Manifest cmd_run(const ExperimentConfig& config, const std::filesystem::path& out_dir, int jobs) {
  const GridResult grid = run_grid(config, config.budget, config.alpha, jobs);

  RunSummary summary;
  for (PolicyKind p : config.policies) summary.policies.push_back(summarize(records_of(grid.records, p)));

  write_text_file(out_dir / "records.csv", csv_text(to_table(record_rows(grid.records))));
  write_text_file(out_dir / "summary.json", dump(to_json(summary)));

  Manifest m{"run", config, grid.instances,
             {{"records", "records.csv"}, {"summary", "summary.json"}}};
  write_manifest(m, out_dir);
  return m;
}

Manifest cmd_pareto(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                    int jobs) {
  if (config.domain != Domain::Diabetes)
    throw Error(ErrorKind::ConfigError, "config.domain: pareto needs the diabetes domain");
  const std::vector<double> alphas =
      config.alphas.empty() ? std::vector<double>{config.alpha} : config.alphas;

  std::vector<ParetoRow> rows;
  std::vector<ParetoRecordRow> record_rows_all;
  Manifest m{"pareto", config, {}, {{"pareto", "pareto.csv"}, {"records", "pareto_records.csv"}}};
  for (double alpha : alphas) {
    const GridResult grid = run_grid(config, config.budget, alpha, jobs);
    m.instances.insert(m.instances.end(), grid.instances.begin(), grid.instances.end());
    const auto part = pareto_record_rows(alpha, grid.records);
    record_rows_all.insert(record_rows_all.end(), part.begin(), part.end());
    for (PolicyKind p : config.policies) {
      const auto recs = records_of(grid.records, p);
      std::vector<double> engagement, clinical, reward;
      for (const auto& r : recs) {
        double n = 0.0, e = 0.0, c = 0.0;
        for (std::size_t g = 0; g < r.per_group_size.size(); ++g) {
          n += r.per_group_size[g];
          e += r.per_group_engagement_reward[g];
          c += r.per_group_clinical_reward[g];
        }
        engagement.push_back(e / n);
        clinical.push_back(c / n);
        reward.push_back(r.total_reward / n);
      }
      ParetoRow row;
      row.alpha = alpha;
      row.policy = std::string(to_string(p));
      row.seeds = static_cast<int>(recs.size());
      mean_stderr(engagement, row.engagement_mean, row.engagement_stderr);
      mean_stderr(clinical, row.clinical_mean, row.clinical_stderr);
      mean_stderr(reward, row.reward_mean, row.reward_stderr);
      rows.push_back(row);
    }
  }
  write_text_file(out_dir / "pareto.csv", csv_text(to_table(rows)));
  write_text_file(out_dir / "pareto_records.csv", csv_text(to_table(record_rows_all)));
  write_manifest(m, out_dir);
  return m;
}

std::optional<int> crossing_budget(const std::vector<CapacityRow>& curve, double target) {
  for (const auto& p : curve)
    if (p.level_mean >= target) return p.budget;
  return std::nullopt;
}

Manifest cmd_capacity(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                      int jobs) {
  if (!config.capacity)
    throw Error(ErrorKind::ConfigError, "config.capacity: capacity needs a budgets/target block");
  const CapacitySweep& sweep = *config.capacity;

  Manifest m{"capacity", config, {}, {{"capacity", "capacity.csv"}, {"curves", "capacity.json"}}};
  std::vector<std::vector<CapacityRow>> per_policy(config.policies.size());
  for (int budget : sweep.budgets) {
    const GridResult grid = run_grid(config, budget, config.alpha, jobs);
    m.instances.insert(m.instances.end(), grid.instances.begin(), grid.instances.end());
    for (std::size_t p = 0; p < config.policies.size(); ++p) {
      std::vector<double> levels;
      for (const auto& r : records_of(grid.records, config.policies[p])) {
        const double n = static_cast<double>(config.n_arms);
        levels.push_back(r.final_round_reward / n);
      }
      CapacityRow row{std::string(to_string(config.policies[p])), budget, 0.0, 0.0};
      mean_stderr(levels, row.level_mean, row.level_stderr);
      per_policy[p].push_back(row);
    }
  }

  std::vector<CapacityRow> rows;
  CapacitySummary summary{sweep.target, {}};
  for (std::size_t p = 0; p < config.policies.size(); ++p) {
    rows.insert(rows.end(), per_policy[p].begin(), per_policy[p].end());
    summary.curves.push_back({std::string(to_string(config.policies[p])), per_policy[p],
                              crossing_budget(per_policy[p], sweep.target)});
  }
  write_text_file(out_dir / "capacity.csv", csv_text(to_table(rows)));
  write_text_file(out_dir / "capacity.json", dump(to_json(summary)));
  write_manifest(m, out_dir);
  return m;
}

void print_domains(std::ostream& out) {
  for (const auto& d : domain_catalog())
    out << d.name << "\tN=" << d.default_arms << " B=" << d.default_budget
        << " H=" << d.default_horizon << "\t" << d.description << '\n';
}

}  // namespace ermab::cli
