#include <benchmark/benchmark.h>

#include "reconkit/digest.hpp"
#include "reconkit/stats/kendall.hpp"

using namespace reconkit;

namespace {

stats::PairedSample sample(std::size_t n) {
    SplitMix64 rng(n);
    stats::PairedSample s;
    for (std::size_t i = 0; i < n; ++i) {
        s.x.push_back(static_cast<double>(rng.below(50)));
        s.y.push_back(static_cast<double>(rng.below(5)));
    }
    return s;
}

void BM_TauB(benchmark::State& state) {
    const auto s = sample(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(stats::kendall_tau_b(s));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_TauB)->RangeMultiplier(10)->Range(100, 100000)->Complexity(benchmark::oNLogN);

void BM_TauC(benchmark::State& state) {
    const auto s = sample(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(stats::kendall_tau_c(s));
}
BENCHMARK(BM_TauC)->Arg(1000)->Arg(100000);

}  // namespace
