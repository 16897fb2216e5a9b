// Parallel kernels against their serial references. Thread count follows
// OMP_NUM_THREADS.
#include <benchmark/benchmark.h>

#include "nlcap/reference.hpp"
#include "nlcap/specfun.hpp"

using namespace nlcap;

namespace {

void BM_CubatureTensorParallel(benchmark::State& st) {
    for (auto _ : st) benchmark::DoNotOptimize(g_cubature_tensor(200.0, static_cast<int>(st.range(0))).value);
}
void BM_CubatureTensorSerial(benchmark::State& st) {
    const int n = static_cast<int>(st.range(0));
    // g_cubature_tensor also evaluates n/2 for its error estimate
    for (auto _ : st) {
        benchmark::DoNotOptimize(reference::g_cubature_tensor(200.0, n));
        benchmark::DoNotOptimize(reference::g_cubature_tensor(200.0, n / 2));
    }
}
void BM_CubatureReduced(benchmark::State& st) {
    for (auto _ : st) benchmark::DoNotOptimize(g_cubature(200.0, static_cast<int>(st.range(0))).value);
}

void BM_RiemannParallel(benchmark::State& st) {
    for (auto _ : st)
        benchmark::DoNotOptimize(g_discrete(200.0, static_cast<int>(st.range(0)), DiscreteMode::riemann).value);
}
void BM_RiemannSerial(benchmark::State& st) {
    for (auto _ : st) benchmark::DoNotOptimize(reference::g_discrete_riemann(200.0, static_cast<int>(st.range(0))));
}

ComplexField bench_input(int m, const PhysicalChannel& ph) {
    RandomStream rng(1);
    return sample_gaussian_input(make_grid(1e11, m, 3), ph.signal_psd, rng);
}

void BM_PhiParallel(benchmark::State& st) {
    const auto ph = typical_link().with_snr(1000.0);
    const auto x = bench_input(static_cast<int>(st.range(0)), ph);
    for (auto _ : st) benchmark::DoNotOptimize(phi_first_order(x, ph).samples.data());
}
void BM_PhiSerial(benchmark::State& st) {
    const auto ph = typical_link().with_snr(1000.0);
    const auto x = bench_input(static_cast<int>(st.range(0)), ph);
    for (auto _ : st) benchmark::DoNotOptimize(reference::phi_first_order(x, ph).samples.data());
}

void BM_MIParallel(benchmark::State& st) {
    const auto ch = PerSampleChannel::from_snr(1000.0, 0.5);
    for (auto _ : st) benchmark::DoNotOptimize(estimate_mi(ch, st.range(0), 1000, 1, {}, true).mi.mean);
}
void BM_MISerial(benchmark::State& st) {
    const auto ch = PerSampleChannel::from_snr(1000.0, 0.5);
    for (auto _ : st) benchmark::DoNotOptimize(reference::estimate_mi(ch, st.range(0), 1000, 1).mean);
}

void BM_NoiseEnsembleParallel(benchmark::State& st) {
    const auto ph = typical_link().with_snr(100.0);
    const auto g = make_grid(1e11, 32, 2);
    PropagationConfig c;
    c.n_steps = 100;
    for (auto _ : st) benchmark::DoNotOptimize(ensemble_noise_stats(ph, g, c, static_cast<int>(st.range(0)), 1).mean_added_power);
}
void BM_NoiseEnsembleSerial(benchmark::State& st) {
    const auto ph = typical_link().with_snr(100.0);
    const auto g = make_grid(1e11, 32, 2);
    PropagationConfig c;
    c.n_steps = 100;
    // the parallel version runs three Q rungs
    for (auto _ : st)
        for (int r = 0; r < 3; ++r)
            benchmark::DoNotOptimize(reference::ensemble_added_power(ph, g, c, static_cast<int>(st.range(0)), 1).mean);
}

}  // namespace

BENCHMARK(BM_CubatureTensorParallel)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CubatureTensorSerial)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CubatureReduced)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RiemannParallel)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RiemannSerial)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PhiParallel)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PhiSerial)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MIParallel)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MISerial)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NoiseEnsembleParallel)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NoiseEnsembleSerial)->Arg(32)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
