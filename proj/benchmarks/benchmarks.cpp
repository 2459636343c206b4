// Microbenchmarks for the hot paths: the prepend argmax scan, hedge rounds,
// and the exact evaluation of the randomized predictor.

#include <benchmark/benchmark.h>

#include <cstdint>

#include "multigroup/experts.hpp"
#include "multigroup/fixtures.hpp"
#include "multigroup/prepend.hpp"
#include "multigroup/risk.hpp"
#include "multigroup/rng.hpp"
#include "multigroup/types.hpp"

namespace {

using namespace multigroup;

// Random instance with overlapping groups over an 8-point domain.
struct BenchInstance {
    FiniteDistribution dist;
    HypothesisClass H;
    GroupFamily G;
    LossSpec loss = LossSpec::zero_one(2);
};

BenchInstance make_instance(int num_hyps, int num_groups, std::uint64_t seed) {
    constexpr int kPoints = 8;
    RngStream rng(seed);
    BenchInstance b;
    b.dist.labels = {"0", "1"};
    double total = 0.0;
    for (int x = 0; x < kPoints; ++x) {
        const double m = 0.25 + rng.next_unit();
        b.dist.mass.push_back(m);
        total += m;
    }
    for (double& m : b.dist.mass) m /= total;
    for (int x = 0; x < kPoints; ++x) {
        const double p = rng.next_unit();
        b.dist.label_dist.push_back({1.0 - p, p});
    }
    b.dist.validate();
    for (int h = 0; h < num_hyps; ++h) {
        Hypothesis hyp;
        for (int x = 0; x < kPoints; ++x) {
            hyp.outputs.push_back(static_cast<PredictionId>(rng.next_u64() & 1));
        }
        b.H.hypotheses.push_back(std::move(hyp));
    }
    for (int g = 0; g < num_groups; ++g) {
        std::vector<std::uint8_t> ind(kPoints, 0);
        for (int x = 0; x < kPoints; ++x) ind[static_cast<std::size_t>(x)] = rng.next_u64() & 1;
        ind[static_cast<std::size_t>(g % kPoints)] = 1;  // never empty
        b.G.groups.emplace_back(std::move(ind));
    }
    return b;
}

void BM_PrependRun(benchmark::State& state) {
    const auto n = static_cast<std::int64_t>(state.range(0));
    const BenchInstance b = make_instance(4, 3, 21);
    RngStream rng(99);
    const Sample s = draw_sample(b.dist, n, rng, &b.G);
    const EpsilonSchedule schedule = EpsilonSchedule::constant(0.02);
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_prepend(b.H, b.G, s, b.loss, schedule));
    }
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_PrependRun)->Arg(1000)->Arg(10000);

void BM_HedgeRounds(benchmark::State& state) {
    const auto n = static_cast<std::int64_t>(state.range(0));
    const BenchInstance b = make_instance(3, 3, 22);
    RngStream rng(100);
    const Sample s = draw_sample(b.dist, n, rng, &b.G);
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_reduction(b.H, b.G, s, b.loss, 1, /*add_catch_all=*/true));
    }
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_HedgeRounds)->Arg(1000)->Arg(10000);

void BM_ExactRiskOfQ(benchmark::State& state) {
    const auto n = static_cast<std::int64_t>(state.range(0));
    const BenchInstance b = make_instance(3, 3, 23);
    RngStream rng(101);
    const Sample s = draw_sample(b.dist, n, rng, &b.G);
    const ReductionResult r = run_reduction(b.H, b.G, s, b.loss, 1, /*add_catch_all=*/true);
    for (auto _ : state) {
        benchmark::DoNotOptimize(exact_risk_of_Q(r.q, r.effective_groups[0], b.dist, b.loss, b.H,
                                                 r.effective_groups));
    }
    state.SetItemsProcessed(state.iterations() * r.hedge_size);
}
BENCHMARK(BM_ExactRiskOfQ)->Arg(1000)->Arg(10000);

void BM_BruteForceLists(benchmark::State& state) {
    const auto [s1, s2] = build_twin_scenarios();
    (void)s2;
    for (auto _ : state) {
        benchmark::DoNotOptimize(brute_force_optimum(s1, PredictorClass::DecisionLists));
    }
}
BENCHMARK(BM_BruteForceLists);

}  // namespace

BENCHMARK_MAIN();
