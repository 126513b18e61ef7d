#include <benchmark/benchmark.h>

#include <vector>

#include "srdetect/detector.hpp"
#include "srdetect/fft.hpp"
#include "srdetect/spectral.hpp"
#include "srdetect/synth.hpp"

using namespace srdetect;

static void BM_Dft(benchmark::State& state) {
  std::size_t n = static_cast<std::size_t>(state.range(0));
  auto series = generate_base(SeriesClass::Seasonal, n, 1);
  auto vals = series.values();
  for (auto _ : state) {
    auto out = fft::dft(vals);
    benchmark::DoNotOptimize(out);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n));
}
BENCHMARK(BM_Dft)->Arg(64)->Arg(1024)->Arg(1440)->Arg(1445);

static void BM_SpectralResidual(benchmark::State& state) {
  std::size_t n = static_cast<std::size_t>(state.range(0));
  SrConfig cfg;
  cfg.window = n;
  auto series = generate_base(SeriesClass::Seasonal, n, 2);
  auto vals = series.values();
  for (auto _ : state) {
    auto sal = spectral_residual(vals, cfg);
    benchmark::DoNotOptimize(sal);
  }
}
BENCHMARK(BM_SpectralResidual)->Arg(64)->Arg(1440);

// Per-point cost of the streaming detector, the number that has to stay
// under 1 ms/point at the minute-granularity window.
static void BM_StreamPerPoint(benchmark::State& state) {
  std::size_t window = static_cast<std::size_t>(state.range(0));
  Granularity g = window >= 1440 ? Granularity::Minute : Granularity::Hour;
  SrConfig cfg = SrConfig::defaults_for(g);
  cfg.window = window;
  auto series = generate_base(SeriesClass::Seasonal, 4 * window, 3, g);
  int64_t points = 0;
  for (auto _ : state) {
    auto results = detect_stream(series, cfg);
    benchmark::DoNotOptimize(results);
    points += static_cast<int64_t>(results.size() - (window - 1));
  }
  state.SetItemsProcessed(points);
}
BENCHMARK(BM_StreamPerPoint)->Arg(64)->Arg(1440)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
