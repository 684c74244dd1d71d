#include <benchmark/benchmark.h>

#include "prequant/harness.hpp"
#include "prequant/quant.hpp"
#include "prequant/rng.hpp"
#include "prequant/transforms.hpp"

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

static void BM_QuantizeActivations(benchmark::State& state) {
    const Tensor2D x = random_tensor(256, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        QuantizedTensor q = quantize_activations(x, 4);
        benchmark::DoNotOptimize(q.codes.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(x.size()));
}
BENCHMARK(BM_QuantizeActivations)->RangeMultiplier(4)->Range(64, 4096);

static void BM_QuantizeWeightsBlocked(benchmark::State& state) {
    const Tensor2D w = random_tensor(static_cast<std::size_t>(state.range(0)), 256);
    for (auto _ : state) {
        QuantizedTensor q = quantize_weights_blocked(w, 4, 128);
        benchmark::DoNotOptimize(q.codes.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(w.size()));
}
BENCHMARK(BM_QuantizeWeightsBlocked)->RangeMultiplier(4)->Range(128, 4096);

static void BM_FakeQuantRoundTrip(benchmark::State& state) {
    const Tensor2D x = random_tensor(256, static_cast<std::size_t>(state.range(0)));
    const QuantConfig cfg = QuantConfig::activations(4);
    for (auto _ : state) {
        Tensor2D y = fake_quant(x, cfg);
        benchmark::DoNotOptimize(y.data().data());
    }
}
BENCHMARK(BM_FakeQuantRoundTrip)->RangeMultiplier(4)->Range(64, 4096);

static void BM_QuantizedLinearSite(benchmark::State& state) {
    const std::size_t d = static_cast<std::size_t>(state.range(0));
    const LinearLayer layer = make_random_layer("bench", d, d, 7);
    const Tensor2D x = random_tensor(128, d);
    QuantSite site;
    site.id = "bench";
    site.layer = layer;
    site.plan = preset_to_plan(TransformPreset::hadanorm, channel_absmax(x),
                               weight_input_absmax(layer.weights), 0.5);
    site.act_cfg = QuantConfig::activations(4);
    site.w_cfg = QuantConfig::weights_blocked(4);
    for (auto _ : state) {
        Tensor2D y = run_quantized(x, site);
        benchmark::DoNotOptimize(y.data().data());
    }
}
BENCHMARK(BM_QuantizedLinearSite)->RangeMultiplier(2)->Range(64, 512);

BENCHMARK_MAIN();
