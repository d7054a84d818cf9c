#include <benchmark/benchmark.h>

#include "foam/fold.hpp"
#include "foam/optim.hpp"
#include "foam/quant.hpp"
#include "foam/rng.hpp"

namespace {

foam::Matrix random_matrix(std::uint64_t seed, std::size_t rows, std::size_t cols) {
    foam::SplitMix64 rng(seed);
    foam::Matrix m(rows, cols);
    for (double& x : m.data()) x = rng.next_gaussian();
    return m;
}

constexpr std::size_t kRows = 256;
constexpr std::size_t kCols = 1024;

void BM_fold_blocked(benchmark::State& state) {
    const auto spec = foam::FoldSpec::make(static_cast<int>(state.range(0)), kCols);
    const foam::Matrix g = random_matrix(1, kRows, kCols);
    for (auto _ : state) {
        benchmark::DoNotOptimize(foam::fold(g, spec));
    }
}
BENCHMARK(BM_fold_blocked)->Arg(1)->Arg(2)->Arg(3);

// the dense-operator route the blocked kernel replaces
void BM_fold_dense(benchmark::State& state) {
    const auto spec = foam::FoldSpec::make(static_cast<int>(state.range(0)), kCols);
    const foam::Matrix g = random_matrix(1, kRows, kCols);
    const foam::Matrix a = foam::build_dense_fold(spec);
    for (auto _ : state) {
        benchmark::DoNotOptimize(foam::dense_matmul(g, a));
    }
}
BENCHMARK(BM_fold_dense)->Arg(1)->Arg(2)->Arg(3);

void BM_residual(benchmark::State& state) {
    const auto spec = foam::FoldSpec::make(2, kCols);
    const foam::Matrix g = random_matrix(2, kRows, kCols);
    for (auto _ : state) {
        benchmark::DoNotOptimize(foam::residual(g, spec));
    }
}
BENCHMARK(BM_residual);

void BM_adam_step(benchmark::State& state) {
    foam::OptimizerConfig cfg;
    cfg.alpha = 1.0;
    foam::AdamState st = foam::AdamState::init(kRows, kCols);
    foam::Matrix w(kRows, kCols);
    const foam::Matrix g = random_matrix(3, kRows, kCols);
    for (auto _ : state) {
        w = foam::adam_step(w, g, st, cfg, 1e-3);
        benchmark::DoNotOptimize(w);
    }
}
BENCHMARK(BM_adam_step);

void BM_foam_step(benchmark::State& state) {
    foam::OptimizerConfig cfg;
    cfg.alpha = 1.0;
    cfg.level = static_cast<int>(state.range(0));
    foam::FoamState st =
        foam::FoamState::init(kRows, foam::FoldSpec::make(cfg.level, kCols));
    foam::Matrix w(kRows, kCols);
    const foam::Matrix g = random_matrix(4, kRows, kCols);
    for (auto _ : state) {
        w = foam::foam_step(w, g, st, cfg, 1e-3);
        benchmark::DoNotOptimize(w);
    }
}
BENCHMARK(BM_foam_step)->Arg(1)->Arg(2)->Arg(3);

void BM_quant_roundtrip(benchmark::State& state) {
    foam::Matrix m = random_matrix(5, kRows, kCols / 4);
    for (auto _ : state) {
        foam::quant_roundtrip(m);
        benchmark::DoNotOptimize(m);
    }
}
BENCHMARK(BM_quant_roundtrip);

}  // namespace

BENCHMARK_MAIN();
