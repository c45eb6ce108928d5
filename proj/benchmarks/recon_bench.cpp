#include <benchmark/benchmark.h>

#include "fixtures.hpp"
#include "reconkit/describer/describer.hpp"
#include "reconkit/recon/cache.hpp"
#include "reconkit/recon/recon_score.hpp"

using namespace reconkit;

namespace {

void BM_MockScore(benchmark::State& state) {
    fixtures::TempDir dir;
    recon::ReconScorer scorer({fixtures::mock_clients(dir.path()), {}, nullptr, 1, std::nullopt});
    const auto img = fixtures::random_image(1, 64, 64);
    for (auto _ : state) benchmark::DoNotOptimize(scorer.score(img, "a harbor with many boats"));
}
BENCHMARK(BM_MockScore);

void BM_CachedScore(benchmark::State& state) {
    fixtures::TempDir dir;
    recon::ReconScorer scorer(
        {fixtures::mock_clients(dir.path()), {}, std::make_shared<recon::ReconCache>(), 1, std::nullopt});
    const auto img = fixtures::random_image(2, 64, 64);
    scorer.score(img, "a harbor with many boats");
    for (auto _ : state) benchmark::DoNotOptimize(scorer.score(img, "a harbor with many boats"));
}
BENCHMARK(BM_CachedScore);

void BM_DescribeMock(benchmark::State& state) {
    fixtures::TempDir dir;
    recon::ReconScorer scorer({fixtures::mock_clients(dir.path()), {}, nullptr, 4, std::nullopt});
    const auto img = fixtures::random_image(3, 64, 64);
    const int n = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(describer::describe(scorer, img, {n, 0.8, 4}));
}
BENCHMARK(BM_DescribeMock)->Arg(4)->Arg(10);

}  // namespace
