#include <benchmark/benchmark.h>

#include "ofbm/bnb.hpp"
#include "ofbm/bound.hpp"
#include "ofbm/relaxation.hpp"
#include "ofbm/synthesis.hpp"
#include "ofbm/wavelet.hpp"

using namespace ofbm;

namespace {

const Theta kTheta{0.4, 0.8, 0.1, 1, 1, 0.5, 0.5};

const SampleSpectrum& spectrum() {
    static const SampleSpectrum s = [] {
        SynthesisConfig c;
        c.theta = kTheta;
        c.n = 1 << 14;
        c.seed = 1;
        return analyze(synthesize(c), AnalysisConfig{});
    }();
    return s;
}

void BM_Synthesize(benchmark::State& state) {
    const Synthesizer s(kTheta, static_cast<std::size_t>(state.range(0)));
    std::uint64_t seed = 0;
    for (auto _ : state) benchmark::DoNotOptimize(s.sample(seed++));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Synthesize)->RangeMultiplier(4)->Range(1 << 10, 1 << 16)->Unit(benchmark::kMillisecond);

void BM_Analyze(benchmark::State& state) {
    SynthesisConfig c;
    c.theta = kTheta;
    c.n = static_cast<std::size_t>(state.range(0));
    const Path p = synthesize(c);
    for (auto _ : state) benchmark::DoNotOptimize(analyze(p, AnalysisConfig{}));
}
BENCHMARK(BM_Analyze)->RangeMultiplier(4)->Range(1 << 10, 1 << 16)->Unit(benchmark::kMicrosecond);

void BM_Objective(benchmark::State& state) {
    const Objective c(spectrum(), shared_eta_set());
    for (auto _ : state) benchmark::DoNotOptimize(c(kTheta));
}
BENCHMARK(BM_Objective);

void BM_BoundCell(benchmark::State& state) {
    const Objective c(spectrum(), shared_eta_set());
    const Relaxation r = build_relaxation(20, spectrum().sigma_max());
    std::size_t k = 0;
    for (auto _ : state) benchmark::DoNotOptimize(bound_cn(r.cells[k++ % r.cells.size()], c));
}
BENCHMARK(BM_BoundCell);

void BM_BoundSmallBox(benchmark::State& state) {
    const Objective c(spectrum(), shared_eta_set());
    ParamBox b = ParamBox::point(kTheta);
    for (std::size_t i = 0; i < kNumParams; ++i) b[i] = Interval(b[i].lo - 0.01, b[i].hi + 0.01);
    for (auto _ : state) benchmark::DoNotOptimize(bound_cn(b, c));
}
BENCHMARK(BM_BoundSmallBox);

void BM_Relaxation(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(build_relaxation(static_cast<int>(state.range(0)), 1.5));
}
BENCHMARK(BM_Relaxation)->Arg(10)->Arg(20)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_SolveRestricted(benchmark::State& state) {
    const Objective c(spectrum(), shared_eta_set());
    BnbConfig cfg;
    cfg.delta_relax = 20;
    cfg.set_delta(0.01);
    const auto v = kTheta.to_array();
    for (std::size_t i = 2; i < kNumParams; ++i) cfg.frozen[i] = v[i];
    for (auto _ : state) benchmark::DoNotOptimize(solve(c, cfg));
}
BENCHMARK(BM_SolveRestricted)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
