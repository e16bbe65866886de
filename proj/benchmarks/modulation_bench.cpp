#include <benchmark/benchmark.h>

#include "foi/modulation.hpp"
#include "foi/random.hpp"

namespace {

foi::AttentionTensor random_tensor(foi::Rng& rng, int heads, int pixels, int tokens) {
    foi::AttentionTensor t(heads, pixels, tokens);
    for (auto& v : t.data) v = 3.0 * rng.normal();
    return t;
}

// Arguments: layer side, token count. Eight heads as in the large backend.
void BM_Modulate(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0)), tokens = static_cast<int>(state.range(1));
    foi::Rng rng(1);
    const auto x = random_tensor(rng, 8, side * side, tokens);
    const auto y = random_tensor(rng, 8, side * side, tokens);
    foi::TokenMask mask(side, tokens, 1);
    for (std::size_t i = 0; i < mask.values.size(); i += 3) mask.values[i] = 0;
    std::vector<double> alpha(static_cast<std::size_t>(tokens), 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(foi::modulate(x, y, mask, alpha, 0.8, 40.0));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(x.data.size()));
}
BENCHMARK(BM_Modulate)->Args({16, 16})->Args({16, 77})->Args({32, 77})->Args({64, 77});

void BM_InterpolateMask(benchmark::State& state) {
    foi::TokenMask mask(16, 77, 1);
    const int side = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(foi::interpolate_mask(mask, side));
}
BENCHMARK(BM_InterpolateMask)->Arg(8)->Arg(32)->Arg(64);

}  // namespace
