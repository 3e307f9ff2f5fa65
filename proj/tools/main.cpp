// ermab: experiment driver for equitable restless bandit policies.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "ermab/cli/config.hpp"
#include "ermab/cli/experiments.hpp"
#include "ermab/errors.hpp"

namespace {

constexpr const char* kOutEnv = "ERMAB_OUT_DIR";

struct CommonFlags {
  std::string config;
  std::string out;
  std::optional<int> seeds;
  int jobs = 1;
  std::string realloc;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "Experiment config (JSON) or a manifest.json")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", f.out, std::string("Output directory (default: $") + kOutEnv +
                                       ", then the config's output_dir, then ./ermab-out)");
  cmd->add_option("--seeds", f.seeds, "Override the number of seeds")->check(CLI::PositiveNumber);
  cmd->add_option("--jobs", f.jobs, "Episodes run concurrently")->check(CLI::PositiveNumber);
  cmd->add_option("--realloc", f.realloc, "Allocation timing")
      ->check(CLI::IsMember({"every-round", "once"}));
}

ermab::cli::ExperimentConfig load(const CommonFlags& f) {
  auto config = ermab::cli::load_config(f.config);
  if (f.seeds) config.seeds = *f.seeds;
  if (!f.realloc.empty()) config.realloc_every_round = f.realloc == "every-round";
  return config;
}

std::filesystem::path output_dir(const CommonFlags& f, const ermab::cli::ExperimentConfig& c) {
  if (!f.out.empty()) return f.out;
  if (const char* env = std::getenv(kOutEnv); env && *env) return env;
  if (!c.output_dir.empty()) return c.output_dir;
  return "ermab-out";
}

int exit_code(ermab::ErrorKind kind) {
  switch (kind) {
    case ermab::ErrorKind::ConfigError:
    case ermab::ErrorKind::ParseError: return 2;
    case ermab::ErrorKind::IoError: return 3;
    default: return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Equitable restless multi-armed bandit experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "ermab 0.1.0");

  CommonFlags run_flags, pareto_flags, capacity_flags;
  auto* run = app.add_subcommand("run", "Run a policy x seed grid");
  add_common(run, run_flags);
  auto* pareto = app.add_subcommand("pareto", "Sweep alpha on the diabetes domain");
  add_common(pareto, pareto_flags);
  auto* capacity = app.add_subcommand("capacity", "Sweep the budget against a target level");
  add_common(capacity, capacity_flags);

  std::string validate_path;
  auto* validate = app.add_subcommand("validate-config", "Check a config and report problems");
  validate->add_option("--config", validate_path, "Config to check")->required();
  auto* list = app.add_subcommand("list-domains", "List the built-in domains");

  CLI11_PARSE(app, argc, argv);

  try {
    auto dispatch = [](const CommonFlags& f, auto command) {
      const auto config = load(f);
      const auto out = output_dir(f, config);
      command(config, out, f.jobs);
      std::cout << "wrote " << out.string() << '\n';
    };
    if (*run) dispatch(run_flags, ermab::cli::cmd_run);
    if (*pareto) dispatch(pareto_flags, ermab::cli::cmd_pareto);
    if (*capacity) dispatch(capacity_flags, ermab::cli::cmd_capacity);
    if (*validate) {
      ermab::cli::load_config(validate_path);
      std::cout << validate_path << ": ok\n";
    }
    if (*list) ermab::cli::print_domains(std::cout);
  } catch (const ermab::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
