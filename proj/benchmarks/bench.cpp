#include <benchmark/benchmark.h>

#include "trbm/deep.hpp"
#include "trbm/trainer.hpp"

namespace {

trbm::RbmModel make_model(std::size_t m, std::size_t n, double t) {
    trbm::RngState rng(1);
    return trbm::RbmModel{trbm::init_layer(m, n, rng, 0.1), trbm::Temperature(t)};
}

std::vector<trbm::BitVector> make_data(std::size_t count, std::size_t m) {
    trbm::RngState rng(2);
    std::vector<trbm::BitVector> data;
    const trbm::RealVector half(m, 0.5);
    for (std::size_t i = 0; i < count; ++i) data.push_back(trbm::sample_bernoulli(half, rng));
    return data;
}

void HiddenConditional(benchmark::State& state) {
    const auto model = make_model(state.range(0), state.range(0), 1.0);
    const auto data = make_data(1, model.visible_size());
    for (auto _ : state) {
        benchmark::DoNotOptimize(trbm::hidden_conditional(model, data[0]));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(HiddenConditional)->RangeMultiplier(2)->Range(64, 1024)->Complexity();

void GibbsStep(benchmark::State& state) {
    const auto model = make_model(state.range(0), state.range(0), 1.0);
    const auto data = make_data(1, model.visible_size());
    trbm::RngState rng(3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(trbm::gibbs_step(model, data[0], rng));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(GibbsStep)->RangeMultiplier(2)->Range(64, 1024)->Complexity();

void CdGradientBatch(benchmark::State& state) {
    const auto model = make_model(256, state.range(0), 1.0);
    const auto batch = make_data(20, 256);
    trbm::RngState rng(4);
    for (auto _ : state) {
        benchmark::DoNotOptimize(trbm::cd_gradient(model, batch, 1, rng));
    }
}
BENCHMARK(CdGradientBatch)->Arg(50)->Arg(200)->Arg(500);

void StackReconstruct(benchmark::State& state) {
    trbm::StackConfig sc;
    sc.train.epochs = 1;
    sc.train.seed = 5;
    const auto data = make_data(100, 64);
    const trbm::StackedModel stack =
        trbm::train_stack(data, {64, 32, 32, 64}, sc, trbm::StackKind::DBM);
    for (auto _ : state) {
        benchmark::DoNotOptimize(trbm::reconstruct(stack, data[0]));
    }
}
BENCHMARK(StackReconstruct);

}  // namespace

BENCHMARK_MAIN();
