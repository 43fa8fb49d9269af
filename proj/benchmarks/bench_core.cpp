#include <cmath>
#include <numbers>
#include <vector>

#include <benchmark/benchmark.h>

#include "homodens/basis.hpp"
#include "homodens/estimator.hpp"
#include "homodens/model.hpp"
#include "homodens/sim.hpp"
#include "homodens/spectral.hpp"

namespace {

namespace hm = homodens::model;
namespace hs = homodens::sim;

void BM_HermiteRow(benchmark::State& state) {
  std::vector<double> row(static_cast<std::size_t>(state.range(0)));
  double x = -3.0;
  for (auto _ : state) {
    homodens::basis::hermite_fn_row(x, row);
    benchmark::DoNotOptimize(row.data());
    x = x > 3.0 ? -3.0 : x + 1e-3;
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_HermiteRow)->Arg(16)->Arg(64)->Arg(128);

// Euler steps per second with N coefficients accumulated on the fly.
void BM_EulerMaruyama(benchmark::State& state) {
  const auto& cat = hm::builtin_potentials();
  const hm::ProblemSpec spec(cat.slow("double-well"), cat.fast("cos", 2 * std::numbers::pi), 1.0, 0.1);
  const int N = static_cast<int>(state.range(0));
  std::size_t steps = 0;
  for (auto _ : state) {
    homodens::estimator::CoeffObserver obs(N);
    hs::Observer* o[] = {&obs};
    steps += hs::euler_maruyama(spec, hs::default_config(0.1, 100.0, 1), hs::Mode::Multiscale, o).steps;
    benchmark::DoNotOptimize(obs.accumulator().sums().data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(steps));
}
BENCHMARK(BM_EulerMaruyama)->Arg(16)->Arg(90)->Unit(benchmark::kMillisecond);

void BM_FrequencyScan(benchmark::State& state) {
  std::vector<double> coeffs(static_cast<std::size_t>(state.range(0)));
  for (std::size_t n = 0; n < coeffs.size(); ++n) coeffs[n] = std::exp(-0.1 * static_cast<double>(n));
  for (auto _ : state) {
    auto a = homodens::spectral::dominant_frequency(coeffs, 2 * std::numbers::pi);
    benchmark::DoNotOptimize(a.scan.magnitude.data());
  }
}
BENCHMARK(BM_FrequencyScan)->Arg(30)->Arg(90)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
