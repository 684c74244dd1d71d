#include <benchmark/benchmark.h>

#include "prequant/fwht.hpp"
#include "prequant/rng.hpp"

using namespace prequant;

namespace {

Tensor2D random_tensor(std::size_t rows, std::size_t cols) {
    Tensor2D x(rows, cols);
    PhiloxRng rng(1, 0);
    for (double& v : x.data()) {
        v = rng.next_normal();
    }
    return x;
}

} // namespace

static void BM_FwhtVector(benchmark::State& state) {
    const std::size_t d = static_cast<std::size_t>(state.range(0));
    std::vector<double> v(d);
    PhiloxRng rng(2, 0);
    for (double& x : v) {
        x = rng.next_normal();
    }
    for (auto _ : state) {
        fwht_inplace(v);
        benchmark::DoNotOptimize(v.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(d));
}
BENCHMARK(BM_FwhtVector)->RangeMultiplier(4)->Range(64, 16384);

static void BM_FwhtRows(benchmark::State& state) {
    const std::size_t d = static_cast<std::size_t>(state.range(0));
    Tensor2D x = random_tensor(256, d);
    for (auto _ : state) {
        Tensor2D y = fwht_rows(x);
        benchmark::DoNotOptimize(y.data().data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * 256 *
                            static_cast<std::int64_t>(d));
}
BENCHMARK(BM_FwhtRows)->RangeMultiplier(4)->Range(64, 4096);

static void BM_NaiveHadamardMultiply(benchmark::State& state) {
    const std::size_t d = static_cast<std::size_t>(state.range(0));
    const Tensor2D h = naive_hadamard(d);
    const Tensor2D x = random_tensor(256, d);
    for (auto _ : state) {
        Tensor2D y = matmul(x, h);
        benchmark::DoNotOptimize(y.data().data());
    }
}
BENCHMARK(BM_NaiveHadamardMultiply)->RangeMultiplier(4)->Range(64, 1024);

BENCHMARK_MAIN();
