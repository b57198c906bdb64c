#include "holespin/fitting.hpp"
#include "holespin/lambda.hpp"
#include "holespin/phonon.hpp"

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

using namespace holespin;

namespace {

std::vector<double> detuning_grid() {
  std::vector<double> d;
  for (int i = 0; i <= 120; ++i) d.push_back(-3.0 + 0.05 * i);
  return d;
}

void BM_SteadyState(benchmark::State& state) {
  const LambdaParams p = cpt_lambda_params(CptParams{}, CptConditions{}, 1.0, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(steady_state(p));
}
BENCHMARK(BM_SteadyState);

void BM_SteadyRho33(benchmark::State& state) {
  const LambdaParams p = cpt_lambda_params(CptParams{}, CptConditions{}, 1.0, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(steady_rho33(p));
}
BENCHMARK(BM_SteadyRho33);

void BM_GammaQuadrature(benchmark::State& state) {
  const T1Params p;
  const int nodes = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(gamma_quadrature(7.0, p, nodes));
}
BENCHMARK(BM_GammaQuadrature)->Arg(16)->Arg(64);

void BM_CptSpectra(benchmark::State& state) {
  const auto d = detuning_grid();
  const std::vector<double> powers = {0.5, 1.0, 2.0, 4.0};
  for (auto _ : state) benchmark::DoNotOptimize(cpt_spectra(CptParams{}, CptConditions{}, d, powers));
}
BENCHMARK(BM_CptSpectra)->Unit(benchmark::kMillisecond);

void BM_TimeEvolve(benchmark::State& state) {
  const LambdaParams p = cpt_lambda_params(CptParams{}, CptConditions{}, 1.0, 0.0);
  const std::vector<double> grid = {100.0, 500.0};
  const Matrix3c rho0 = DensityMatrix3::diagonal(0.5, 0.5, 0.0).matrix();
  for (auto _ : state) benchmark::DoNotOptimize(time_evolve(rho0, p, grid));
}
BENCHMARK(BM_TimeEvolve)->Unit(benchmark::kMicrosecond);

void BM_FitExponential(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  DataSeries s;
  for (int i = 0; i < 50; ++i) {
    const double x = 2550.0 * i / 49.0;
    s.x.push_back(x);
    s.y.push_back(1.0 - std::exp(-x / 510.0) + 0.05 * nd(rng));
  }
  for (auto _ : state) benchmark::DoNotOptimize(fit_exponential(s));
}
BENCHMARK(BM_FitExponential)->Unit(benchmark::kMicrosecond);

void BM_FitCptGlobal(benchmark::State& state) {
  const auto d = detuning_grid();
  const std::vector<double> powers = {0.5, 1.0, 2.0, 4.0};
  const CptParams truth;
  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd;
  std::vector<DataSeries> data;
  for (const auto& sp : cpt_spectra(truth, CptConditions{}, d, powers)) {
    DataSeries s;
    s.x = d;
    for (double v : sp.rho33) s.y.push_back(v + 0.003 * nd(rng));
    s.power = sp.power;
    data.push_back(std::move(s));
  }
  CptFitSetup setup;
  setup.initial.t2_star *= 1.1;
  setup.initial.gamma3 *= 0.9;
  for (auto _ : state) benchmark::DoNotOptimize(fit_cpt_global(data, setup));
}
BENCHMARK(BM_FitCptGlobal)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
