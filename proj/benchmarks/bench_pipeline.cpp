#include <benchmark/benchmark.h>

#include <random>

#include "ovo/calibration.hpp"
#include "ovo/coupling.hpp"
#include "ovo/eval.hpp"
#include "test_util.hpp"

using namespace ovo;

static void BM_SolveCoupling(benchmark::State& state) {
    const auto k = static_cast<std::size_t>(state.range(0));
    std::mt19937_64 rng(1);
    auto m = testutil::random_calibrated_matrix(k, rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_coupling(m));
    }
}
BENCHMARK(BM_SolveCoupling)->Arg(3)->Arg(10)->Arg(50);

static void BM_ProjectedGradientCoupling(benchmark::State& state) {
    const auto k = static_cast<std::size_t>(state.range(0));
    std::mt19937_64 rng(1);
    auto m = testutil::random_calibrated_matrix(k, rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(projected_gradient_coupling(m));
    }
}
BENCHMARK(BM_ProjectedGradientCoupling)->Arg(3)->Arg(10);

static void BM_FitCalibration(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> hi(0.55, 1.0), lo(0.0, 0.45);
    CalibrationFitData data;
    data.n_i = data.n_j = n;
    for (std::size_t s = 0; s < n; ++s) data.samples.push_back({hi(rng), true});
    for (std::size_t s = 0; s < n; ++s) data.samples.push_back({lo(rng), false});
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit_calibration(data));
    }
}
BENCHMARK(BM_FitCalibration)->Arg(50)->Arg(500);

static void BM_TrainPairwiseSuite(benchmark::State& state) {
    auto ds = gen_synthetic(4, 100, 2, 4.0, 3);
    TrainOptions opts;
    opts.epochs = 100;
    for (auto _ : state) {
        benchmark::DoNotOptimize(train_pairwise_suite(ds, opts));
    }
}
BENCHMARK(BM_TrainPairwiseSuite);

BENCHMARK_MAIN();
