#include <random>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "moodpulse/changepoint.hpp"
#include "moodpulse/topics.hpp"

using namespace moodpulse;

namespace {

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d(0.1, 0.01);
    std::vector<double> v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

DailyAffectSeries series(std::size_t n) {
    DailyAffectSeries s;
    s.category = AffectCategory::anger;
    s.start = *parse_date("2024-01-01");
    s.values = noise(n, 3);
    for (std::size_t i = n / 2; i < n; ++i) s.values[i] += 0.05;
    s.counts.assign(n, 100);
    s.missing.assign(n, false);
    return s;
}

}  // namespace

static void BM_CusumWindow(benchmark::State& state) {
    auto x = noise(28, 1);
    for (auto _ : state) benchmark::DoNotOptimize(cusum_window(x, static_cast<std::size_t>(state.range(0)), 9));
}
BENCHMARK(BM_CusumWindow)->Arg(100)->Arg(1000);

static void BM_CusumDetect(benchmark::State& state) {
    auto s = series(static_cast<std::size_t>(state.range(0)));
    DetectorConfig cfg;
    for (auto _ : state) benchmark::DoNotOptimize(cusum_detect(s, cfg));
}
BENCHMARK(BM_CusumDetect)->Arg(120)->Arg(365);

static void BM_BocpdScores(benchmark::State& state) {
    auto x = noise(static_cast<std::size_t>(state.range(0)), 2);
    auto prior = resolve_prior(BocpdPrior{}, x);
    for (auto _ : state) benchmark::DoNotOptimize(changepoint_scores(x, prior, 0.01, 2));
}
BENCHMARK(BM_BocpdScores)->Arg(120)->Arg(365)->Arg(1000);

static void BM_ExtractTopics(benchmark::State& state) {
    std::mt19937_64 rng(4);
    std::vector<TokenList> docs(static_cast<std::size_t>(state.range(0)));
    for (std::size_t i = 0; i < docs.size(); ++i)
        for (int j = 0; j < 12; ++j) docs[i].push_back("w" + std::to_string(rng() % 50 + 50 * (i % 5)));
    TopicConfig cfg;
    for (auto _ : state) benchmark::DoNotOptimize(extract_topics(docs, cfg));
}
BENCHMARK(BM_ExtractTopics)->Arg(200)->Arg(1000);

BENCHMARK_MAIN();
