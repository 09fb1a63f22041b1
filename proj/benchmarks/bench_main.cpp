// SPDX-License-Identifier: Apache-2.0
#include "tvtr/bspline.hpp"
#include "tvtr/cp_als.hpp"
#include "tvtr/design.hpp"
#include "tvtr/simulation.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace tvtr;

ObservationSet sim_data(std::size_t subjects, const Shape& q) {
    SimScenario s;
    s.subjects = subjects;
    s.response_shape = q;
    s.seed = 1;
    return generate(s).observed;
}

void BM_BasisEvaluate(benchmark::State& state) {
    const BSplineBasis b(1.0, 3, static_cast<std::size_t>(state.range(0)));
    double t = 0.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(b.evaluate(t));
        t = t + 0.0137 > 1.0 ? 0.0 : t + 0.0137;
    }
}
BENCHMARK(BM_BasisEvaluate)->Arg(5)->Arg(20)->Arg(80);

void BM_PenaltyGram(benchmark::State& state) {
    const BSplineBasis b(1.0, 3, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(penalty_gram(b));
}
BENCHMARK(BM_PenaltyGram)->Arg(20)->Arg(80);

void BM_BuildAugmentedSystem(benchmark::State& state) {
    const ObservationSet o = sim_data(static_cast<std::size_t>(state.range(0)), {5, 2});
    const BSplineBasis b(1.0, 3, 20);
    for (auto _ : state) benchmark::DoNotOptimize(build_augmented_system(o, b, 0.01, 0.5));
}
BENCHMARK(BM_BuildAugmentedSystem)->Arg(30)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_BlockSolve(benchmark::State& state) {
    const ObservationSet o = sim_data(30, {5, 2});
    const BSplineBasis b(1.0, 3, 20);
    const AugmentedSystem sys = build_augmented_system(o, b, 0.01, 0.5);
    const CPFactors f = init_factors(sys.coefficient_shape(), static_cast<std::size_t>(state.range(1)), 3);
    const auto block = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        if (block < sys.covariate_modes()) {
            benchmark::DoNotOptimize(solve_u_block(sys, f, block));
        } else {
            benchmark::DoNotOptimize(solve_v_block(sys, f, block - sys.covariate_modes()));
        }
    }
}
BENCHMARK(BM_BlockSolve)
    ->ArgsProduct({{0, 1, 3}, {1, 4}})
    ->ArgNames({"block", "rank"})
    ->Unit(benchmark::kMillisecond);

void BM_Fit(benchmark::State& state) {
    const ObservationSet o = sim_data(30, {5, 2});
    FitConfig c;
    c.rank = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(fit(o, c));
}
BENCHMARK(BM_Fit)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
