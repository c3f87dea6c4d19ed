#include <benchmark/benchmark.h>

#include "hjhom/cell.hpp"
#include "hjhom/effective.hpp"
#include "hjhom/parabolic.hpp"

using namespace hjhom;

namespace {

EnvironmentSpec bump_spec() {
  EnvironmentSpec s;
  s.diffusion.family = "sin2";
  s.hamiltonian.family = "power";
  s.hamiltonian.gamma = 3.0;
  s.hamiltonian.potential.family = "bumps";
  s.hamiltonian.potential.level = 1.0;
  s.hamiltonian.potential.amplitude = -0.5;
  s.hamiltonian.potential.period = 1.0;
  return s;
}

EnvironmentSpec random_spec() {
  EnvironmentSpec s;
  s.diffusion.family = "poisson";
  s.diffusion.slope = 2.0;
  s.hamiltonian.family = "power";
  s.hamiltonian.gamma = 3.0;
  s.hamiltonian.linear = 0.5;
  s.hamiltonian.potential.family = "shot-noise";
  s.hamiltonian.potential.amplitude = 0.5;
  s.hamiltonian.potential.intensity = 2.0;
  s.hamiltonian.potential.width = 0.3;
  return s;
}

void BM_MinProfile(benchmark::State& st) {
  Environment env = sample_environment(random_spec(), 1);
  double x = 0.0;
  for (auto _ : st) {
    benchmark::DoNotOptimize(min_profile(env.hamiltonian(), x));
    x += 0.013;
  }
}
BENCHMARK(BM_MinProfile);

void BM_SampleRandomEnvironment(benchmark::State& st) {
  EnvironmentSpec s = random_spec();
  s.macro_length = static_cast<double>(st.range(0));
  std::uint64_t seed = 1;
  for (auto _ : st) benchmark::DoNotOptimize(sample_environment(s, seed++));
}
BENCHMARK(BM_SampleRandomEnvironment)->Arg(10)->Arg(40)->Unit(benchmark::kMillisecond);

void BM_BranchAverage(benchmark::State& st) {
  CellProblem cell(sample_environment(bump_spec(), 0), {0.0, 1.0});
  for (auto _ : st) benchmark::DoNotOptimize(branch_average(cell, 2.0, Branch::plus));
}
BENCHMARK(BM_BranchAverage)->Unit(benchmark::kMicrosecond);

void BM_CriticalValue(benchmark::State& st) {
  CellProblem cell(sample_environment(bump_spec(), 0), {0.0, 1.0});
  for (auto _ : st) benchmark::DoNotOptimize(critical_value(cell));
}
BENCHMARK(BM_CriticalValue)->Unit(benchmark::kMillisecond);

void BM_EffectiveCurve(benchmark::State& st) {
  CellProblem cell(sample_environment(bump_spec(), 0), {0.0, 1.0});
  for (auto _ : st) benchmark::DoNotOptimize(build_effective_curve(cell));
}
BENCHMARK(BM_EffectiveCurve)->Unit(benchmark::kMillisecond);

void BM_ParabolicStep(benchmark::State& st) {
  SchemeConfig cfg;
  cfg.dx = 1.0 / static_cast<double>(st.range(0));
  cfg.flux = st.range(1) ? NumericalHamiltonian::engquist_osher : NumericalHamiltonian::lax_friedrichs;
  ParabolicSolver s(sample_environment(bump_spec(), 0), 0.5, cfg);
  for (auto _ : st) s.step();
  st.SetItemsProcessed(st.iterations() * st.range(0));
}
BENCHMARK(BM_ParabolicStep)->Args({50, 0})->Args({50, 1})->Args({200, 0})->Args({200, 1});

}  // namespace

BENCHMARK_MAIN();
