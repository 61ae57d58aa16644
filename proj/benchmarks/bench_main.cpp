#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "glhydro/dynamics.hpp"
#include "glhydro/free_energy.hpp"
#include "glhydro/inequality_lab.hpp"
#include "glhydro/lattice.hpp"

using namespace glhydro;

namespace {

std::vector<double> profile(int n) {
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = 0.5 * std::sin(2 * std::numbers::pi * i / n);
  return x;
}

}  // namespace

static void BM_LogPartition(benchmark::State& state) {
  const auto pot = Potential::quartic();
  double s = -2.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(log_partition_1d(pot, s, 1e-10));
    s = s > 2.0 ? -2.0 : s + 0.01;
  }
}
BENCHMARK(BM_LogPartition);

static void BM_PsiK(benchmark::State& state) {
  const auto pot = Potential::quartic();
  const auto block = realize_field(FieldSpec::two_point(0.5, 1), state.range(0)).values;
  for (auto _ : state) benchmark::DoNotOptimize(psi_K(pot, block, 0.3, 1e-9));
}
BENCHMARK(BM_PsiK)->Arg(4)->Arg(16)->Arg(32);

static void BM_Sqrt2A(benchmark::State& state) {
  const auto x = profile(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(sqrt2A_mul(x));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Sqrt2A)->RangeMultiplier(4)->Range(64, 4096)->Complexity();

static void BM_KawasakiStep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto pot = Potential::quartic();
  const auto field = realize_field(FieldSpec::two_point(0.5, 1), n).values;
  auto s = MicroState::from_values(profile(n));
  CounterStream rng(1, 0);
  std::size_t k = 0;
  for (auto _ : state) kawasaki_step(s, pot, field, stable_dt(pot, s.x), &rng, k++);
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_KawasakiStep)->Arg(64)->Arg(256)->Arg(1024);

static void BM_PdeStep(benchmark::State& state) {
  const auto fe = tabulate_phi_tilde(Potential::quartic(), FieldSpec::two_point(0.5, 1),
                                     uniform_grid(-2, 2, 81), 1e-9);
  PdeGrid grid{profile(static_cast<int>(state.range(0)))};
  const double dt = 0.5 * pde_max_dt(grid, fe);
  for (auto _ : state) grid = hydro_pde_step(grid, fe, dt);
}
BENCHMARK(BM_PdeStep)->Arg(512)->Arg(1024);

static void BM_SpectralGapTwoSites(benchmark::State& state) {
  const std::vector<double> block{0.5, -0.5};
  for (auto _ : state) {
    benchmark::DoNotOptimize(spectral_gap_canonical(Potential::quartic(), block, 0.0, static_cast<int>(state.range(0))));
  }
}
BENCHMARK(BM_SpectralGapTwoSites)->Arg(201)->Arg(801)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
