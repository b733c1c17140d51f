#include <nlocal/dynamics.hpp>
#include <nlocal/locality_fit.hpp>
#include <nlocal/spectroscopy.hpp>
#include <nlocal/units.hpp>

#include <benchmark/benchmark.h>

using namespace nlocal;

static void BM_TransitionEnergy(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const SpinSystemSpec spec = default_spec(n, 1);
  const auto configs = all_field_configurations(n);
  const Eigen::MatrixXd h = realize_hamiltonian(spec, configs.back(), units::ghz(5.0));
  for (auto _ : state) benchmark::DoNotOptimize(transition_energy(h));
}
BENCHMARK(BM_TransitionEnergy)->DenseRange(2, 6);

static void BM_Sweep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const SpinSystemSpec spec = default_spec(n, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(generate_sweep(spec, kDefaultGridPoints, units::mhz(5.0), 7).values.data());
  }
}
BENCHMARK(BM_Sweep)->DenseRange(2, 5)->Unit(benchmark::kMillisecond);

static void BM_Fit(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const SpinSystemSpec spec = default_spec(n, 1);
  const SpectroscopySweep sweep = generate_sweep(spec, kDefaultGridPoints, units::mhz(5.0), 7);
  FitOptions options;
  options.starts = 1;
  for (auto _ : state) benchmark::DoNotOptimize(fit_model(sweep, spec, n - 1, options).cost);
}
BENCHMARK(BM_Fit)->DenseRange(2, 4)->Unit(benchmark::kMillisecond);

// One sample interval of open-system evolution; reports time per RK4 step.
static void BM_LindbladStep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const SpinSystemSpec spec = default_spec(n, 1);
  const DriveSpec drive = DriveSpec::nlocal(n, spec.M, resonant_frequency(spec));
  long steps = 0;
  for (auto _ : state) {
    const auto report = evolve_lindblad(spec, drive, {.t2 = 100.0}, 0.2, ProductXState::uniform(n, XSign::minus),
                                        {.sample_interval = 0.2});
    steps += report.steps;
  }
  state.counters["steps"] = benchmark::Counter(static_cast<double>(steps), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_LindbladStep)->DenseRange(2, 6)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
