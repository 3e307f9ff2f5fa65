#include <benchmark/benchmark.h>

#include "ermab/domains.hpp"
#include "ermab/policies.hpp"
#include "ermab/rng.hpp"
#include "ermab/simulation.hpp"
#include "ermab/value_iteration.hpp"
#include "ermab/whittle.hpp"

namespace {

using namespace ermab;

const ArmModel& diabetes_arm0() {
  static const ArmModel arm =
      diabetes_arm(DiabetesSpec::default_diabetes_table()[0], 0.5, 0);
  return arm;
}

GroupedInstance diabetes_instance(int n_arms) {
  DiabetesSpec spec;
  spec.n_arms = n_arms;
  spec.budget = n_arms / 4;
  spec.horizon = 20;
  return build_diabetes(spec);
}

void BM_ChargedValues(benchmark::State& state) {
  const int remaining = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(charged_values(diabetes_arm0(), remaining, 0.3));
}
BENCHMARK(BM_ChargedValues)->Arg(5)->Arg(20);

void BM_WhittleIndex(benchmark::State& state) {
  const int remaining = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(whittle_index(diabetes_arm0(), 0, remaining));
}
BENCHMARK(BM_WhittleIndex)->Arg(5)->Arg(20);

// One allocation call at t = 0 with the indexes already computed.
void BM_PlanAllocation(benchmark::State& state) {
  const auto kind = static_cast<PolicyKind>(state.range(0));
  const auto inst = diabetes_instance(static_cast<int>(state.range(1)));
  const std::size_t n = inst.n_arms();
  std::vector<std::uint64_t> keys(n);
  std::vector<double> indexes(n);
  SolverCache cache;
  for (std::size_t i = 0; i < n; ++i) {
    keys[i] = inst.arms[i].fingerprint();
    indexes[i] = cache.index(inst.arms[i], keys[i], inst.start_states[i], inst.horizon);
  }
  auto rng = make_stream(1, StreamPurpose::Upsample);
  for (auto _ : state)
    benchmark::DoNotOptimize(plan_allocation(kind, inst, inst.start_states, inst.horizon, indexes,
                                             keys, ChargeRule::Envelope, rng, nullptr));
  state.SetLabel(std::string(to_string(kind)));
}
BENCHMARK(BM_PlanAllocation)
    ->Args({static_cast<int>(PolicyKind::MMR), 60})
    ->Args({static_cast<int>(PolicyKind::MNW), 60})
    ->Args({static_cast<int>(PolicyKind::MNWEG), 60})
    ->Unit(benchmark::kMillisecond);

void BM_SyntheticEpisode(benchmark::State& state) {
  SyntheticSpec spec;
  const auto inst = build_synthetic(spec);
  const auto kind = static_cast<PolicyKind>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(run_episode(inst, {kind}, seed++));
  state.SetLabel(std::string(to_string(kind)));
}
BENCHMARK(BM_SyntheticEpisode)
    ->Arg(static_cast<int>(PolicyKind::NoAct))
    ->Arg(static_cast<int>(PolicyKind::Opt))
    ->Arg(static_cast<int>(PolicyKind::MNWEG))
    ->Unit(benchmark::kMillisecond);

void BM_DiabetesEpisode(benchmark::State& state) {
  const auto inst = diabetes_instance(60);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(run_episode(inst, {PolicyKind::MMR}, seed++));
}
BENCHMARK(BM_DiabetesEpisode)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
