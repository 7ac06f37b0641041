// Copyright 2026 The gradphi Authors
// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "gradphi/dynamics.hpp"
#include "gradphi/norms.hpp"
#include "gradphi/parabolic.hpp"

using namespace gradphi;

namespace {

// Site-steps per second of the periodic dynamic.
void BM_PeriodicStep(benchmark::State& state, Potential V) {
    const int L = int(state.range(0));
    const TorusGrid g(2, L);
    const NoiseSource src(1, 0, 1.0);
    RunOptions o;
    o.record_stride = 0;
    const double dt = stable_dt(2, V.c_plus());
    const double horizon = 64 * dt;
    for (auto _ : state) {
        auto u = run_corrector(g, -horizon, 0.0, SlopePath::constant({0.3, 0.1}), V, src, o);
        benchmark::DoNotOptimize(u);
    }
    state.SetItemsProcessed(state.iterations() * std::int64_t(g.size()) * 64);
}

void BM_NoiseIncrement(benchmark::State& state) {
    const NoiseSource src(1, 0, 1.0);
    std::uint32_t k = 0;
    double acc = 0.0;
    for (auto _ : state) {
        acc += src.increment(k++, 7);
    }
    benchmark::DoNotOptimize(acc);
    state.SetItemsProcessed(state.iterations());
}

void BM_HeatKernel(benchmark::State& state) {
    const TorusGrid g(2, int(state.range(0)));
    const auto a = EdgeSeries::uniform(g, 1.0);
    for (auto _ : state) {
        auto P = heat_kernel(g, a, 0.0, 0, 16.0, 0.125);
        benchmark::DoNotOptimize(P);
    }
}

void BM_DualNormExact(benchmark::State& state) {
    const int side = int(state.range(0));
    auto f = ParabolicSample::zeros(2, side, side * side, 1.0);
    for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] = double(i % 7) - 3.0;
    for (auto _ : state) benchmark::DoNotOptimize(hminus1_par_exact(f).value);
}

}  // namespace

BENCHMARK_CAPTURE(BM_PeriodicStep, quadratic, Potential::quadratic())->Arg(8)->Arg(32);
BENCHMARK_CAPTURE(BM_PeriodicStep, soft_quartic, Potential::soft_quartic(0.5))->Arg(8)->Arg(32);
BENCHMARK_CAPTURE(BM_PeriodicStep, kinked, Potential::kinked(0.5))->Arg(32);
BENCHMARK(BM_NoiseIncrement);
BENCHMARK(BM_HeatKernel)->Arg(4)->Arg(16);
BENCHMARK(BM_DualNormExact)->Arg(9);
BENCHMARK_MAIN();
