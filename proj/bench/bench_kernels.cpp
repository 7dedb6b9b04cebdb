// Serial reference vs OpenMP kernels of the surface stage.
//
//   smilejump_bench --benchmark_filter=Smiles
//
// Thread count follows OMP_NUM_THREADS / SMILEJUMP_THREADS.

#include "smilejump/kernels.hpp"
#include "smilejump/parallel.hpp"
#include "smilejump/synth.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace smilejump;

namespace {

struct IvBatch {
    std::vector<PricingInputs> problems;
    std::vector<double> targets;
};

const IvBatch& iv_batch() {
    static const IvBatch batch = [] {
        IvBatch b;
        std::mt19937_64 rng(1);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int i = 0; i < 20000; ++i) {
            PricingInputs p{100.0, 75 + 60 * u(rng), 0.0, 0.1 + 0.8 * u(rng), 0.1 + 0.5 * u(rng), OptionRight::call};
            if (p.strike < p.spot) p.right = OptionRight::put;
            b.targets.push_back(bs_price(p));
            b.problems.push_back(p);
        }
        return b;
    }();
    return batch;
}

struct ChainDay {
    std::vector<OptionQuote> quotes;
    std::vector<MinuteQuotes> minutes;
};

const ChainDay& chain_day() {
    static const ChainDay day = [] {
        MarketSpec spec;
        spec.days = 1;
        ChainDay c;
        c.quotes = SyntheticMarket(spec).chain_day(0);
        for (std::size_t i = 0; i < c.quotes.size();) {
            std::size_t j = i;
            while (j < c.quotes.size() && c.quotes[j].timestamp == c.quotes[i].timestamp) ++j;
            c.minutes.push_back({c.quotes[i].timestamp, std::span<const OptionQuote>(c.quotes).subspan(i, j - i)});
            i = j;
        }
        return c;
    }();
    return day;
}

void BM_ImpliedVolsSerial(benchmark::State& state) {
    const auto& b = iv_batch();
    for (auto _ : state) benchmark::DoNotOptimize(reference::implied_vols(b.problems, b.targets));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(b.problems.size()));
}

void BM_ImpliedVolsOpenMP(benchmark::State& state) {
    const auto& b = iv_batch();
    for (auto _ : state) benchmark::DoNotOptimize(implied_vols(b.problems, b.targets));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(b.problems.size()));
}

void BM_SmilesSerial(benchmark::State& state) {
    const auto& c = chain_day();
    const SurfaceConfig cfg;
    for (auto _ : state) benchmark::DoNotOptimize(reference::extract_minute_smiles(c.minutes, cfg));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(c.minutes.size()));
}

void BM_SmilesOpenMP(benchmark::State& state) {
    const auto& c = chain_day();
    const SurfaceConfig cfg;
    for (auto _ : state) benchmark::DoNotOptimize(extract_minute_smiles(c.minutes, cfg));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(c.minutes.size()));
}

} // namespace

BENCHMARK(BM_ImpliedVolsSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ImpliedVolsOpenMP)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SmilesSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SmilesOpenMP)->Unit(benchmark::kMillisecond);

int main(int argc, char** argv) {
    configure_workers();
    benchmark::Initialize(&argc, argv);
    if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
    benchmark::RunSpecifiedBenchmarks();
    benchmark::Shutdown();
    return 0;
}
