// Serial reference vs OpenMP kernels.

#include "ivexp/calibration.hpp"
#include "ivexp/expansion.hpp"
#include "ivexp/fourier.hpp"
#include "ivexp/models.hpp"

#include <benchmark/benchmark.h>

#include <vector>

using namespace ivexp;

namespace {

std::vector<double> grid(double lo, double hi, int n) {
    std::vector<double> g;
    for (int i = 0; i < n; ++i) g.push_back(lo + (hi - lo) * i / (n - 1));
    return g;
}

const MertonParams kMerton{0.25, 1.5, -0.15, 0.3};

ExpansionCoefficients merton_coeffs() { return levy_coefficients(kMerton, 1.0, 0.55, 8); }

void BM_SmileCurveSerial(benchmark::State& state) {
    const auto c = merton_coeffs();
    const auto z = grid(-1.4, 1.4, static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(smile_curve_serial(c, ExpansionOrder(3, 8), 0.0, z));
}

void BM_SmileCurveParallel(benchmark::State& state) {
    const auto c = merton_coeffs();
    const auto z = grid(-1.4, 1.4, static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(smile_curve(c, ExpansionOrder(3, 8), 0.0, z));
}

void BM_FourierSerial(benchmark::State& state) {
    const HestonModel m({1.0, 0.3, 0.7, -0.3, 0.5});
    const auto z = grid(-1.0, 1.0, static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(fourier_call_prices_serial(m, 1.0, 0.0, z));
}

void BM_FourierParallel(benchmark::State& state) {
    const HestonModel m({1.0, 0.3, 0.7, -0.3, 0.5});
    const auto z = grid(-1.0, 1.0, static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(fourier_call_prices(m, 1.0, 0.0, z));
}

QuoteSurface surface(int slices) {
    QuoteSurface s;
    for (int i = 0; i < slices; ++i) {
        const double t = 0.25 * (i + 1);
        const auto c = levy_coefficients(kMerton, t, 0.55, 8);
        QuoteSlice q;
        q.t = t;
        q.strikes = grid(-t, t, 15);
        for (const auto& a : smile_curve_serial(c, ExpansionOrder(3, 8), 0.0, q.strikes)) q.vols.push_back(a.total);
        s.slices.push_back(q);
    }
    return s;
}

void BM_CalibrateSerial(benchmark::State& state) {
    const auto s = surface(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(calibrate_surface_serial(s, ExpansionOrder(3, 8)));
}

void BM_CalibrateParallel(benchmark::State& state) {
    const auto s = surface(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(calibrate_surface(s, ExpansionOrder(3, 8)));
}

}  // namespace

BENCHMARK(BM_SmileCurveSerial)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SmileCurveParallel)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_FourierSerial)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_FourierParallel)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_CalibrateSerial)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_CalibrateParallel)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
