// Parallel kernels vs. the serial reference implementations they are
// tested against. Run with --benchmark_filter=... to narrow.

#include <benchmark/benchmark.h>

#include "mvtest/density_gof.hpp"
#include "mvtest/kernels.hpp"
#include "mvtest/model.hpp"
#include "mvtest/ref.hpp"
#include "mvtest/rng.hpp"
#include "mvtest/twosample.hpp"

namespace {

using namespace mvtest;

ContinuousSample make_sample(std::int64_t n, int d, std::uint64_t seed) {
    Rng rng = RngPlan{seed}.stream(0);
    ContinuousSample s;
    s.n = n;
    s.d = d;
    s.data.resize(static_cast<std::size_t>(n) * d);
    for (auto& v : s.data) v = rng.uniform();
    return s;
}

void BM_pairwise_omp(benchmark::State& state) {
    const auto s = make_sample(state.range(0), 5, 11);
    for (auto _ : state) benchmark::DoNotOptimize(pairwise_distances(s));
}
void BM_pairwise_serial(benchmark::State& state) {
    const auto s = make_sample(state.range(0), 5, 11);
    for (auto _ : state) benchmark::DoNotOptimize(ref::pairwise_distances(s));
}

void BM_dominance_omp(benchmark::State& state) {
    const auto s = make_sample(state.range(0), 5, 12);
    for (auto _ : state) benchmark::DoNotOptimize(dominance_counts(s));
}
void BM_dominance_serial(benchmark::State& state) {
    const auto s = make_sample(state.range(0), 5, 12);
    for (auto _ : state) benchmark::DoNotOptimize(ref::dominance_counts(s));
}

void BM_knn_omp(benchmark::State& state) {
    const auto s = make_sample(state.range(0), 5, 13);
    const auto dist = pairwise_distances(s);
    for (auto _ : state) benchmark::DoNotOptimize(knn_indices(dist, 5));
}
void BM_knn_serial(benchmark::State& state) {
    const auto s = make_sample(state.range(0), 5, 13);
    for (auto _ : state) benchmark::DoNotOptimize(ref::knn_indices(s, 5));
}

void BM_mst_omp(benchmark::State& state) {
    const auto s = make_sample(state.range(0), 5, 14);
    const auto dist = pairwise_distances(s);
    for (auto _ : state) benchmark::DoNotOptimize(minimum_spanning_tree(dist));
}
void BM_mst_serial(benchmark::State& state) {
    const auto s = make_sample(state.range(0), 5, 14);
    for (auto _ : state) benchmark::DoNotOptimize(ref::minimum_spanning_tree(s));
}

void BM_kde_distance_omp(benchmark::State& state) {
    const auto s = make_sample(state.range(0), 2, 15);
    const NullModel m = make_uniform(2);
    for (auto _ : state) benchmark::DoNotOptimize(br_stat(s, m));
}
void BM_kde_distance_serial(benchmark::State& state) {
    const auto s = make_sample(state.range(0), 2, 15);
    const NullModel m = make_uniform(2);
    for (auto _ : state) benchmark::DoNotOptimize(ref::kde_distance(s, m.pdf));
}

void BM_ts_context_omp(benchmark::State& state) {
    const auto x = make_sample(state.range(0), 5, 16);
    const auto y = make_sample(state.range(0), 5, 17);
    for (auto _ : state) benchmark::DoNotOptimize(make_ts_context(x, y, true, true, true, true, true, true));
}
void BM_ts_mmd_serial(benchmark::State& state) {
    const auto x = make_sample(state.range(0), 5, 16);
    const auto y = make_sample(state.range(0), 5, 17);
    for (auto _ : state) benchmark::DoNotOptimize(ref::ts_mmd(x, y));
}

}  // namespace

BENCHMARK(BM_pairwise_omp)->Arg(200)->Arg(1000);
BENCHMARK(BM_pairwise_serial)->Arg(200)->Arg(1000);
BENCHMARK(BM_dominance_omp)->Arg(200)->Arg(1000);
BENCHMARK(BM_dominance_serial)->Arg(200)->Arg(1000);
BENCHMARK(BM_knn_omp)->Arg(200)->Arg(1000);
BENCHMARK(BM_knn_serial)->Arg(200)->Arg(1000);
BENCHMARK(BM_mst_omp)->Arg(200)->Arg(1000);
BENCHMARK(BM_mst_serial)->Arg(200)->Arg(1000);
BENCHMARK(BM_kde_distance_omp)->Arg(200)->Arg(500);
BENCHMARK(BM_kde_distance_serial)->Arg(200)->Arg(500);
BENCHMARK(BM_ts_context_omp)->Arg(200)->Arg(500);
BENCHMARK(BM_ts_mmd_serial)->Arg(200)->Arg(500);

BENCHMARK_MAIN();
