// Microbenchmarks for the numeric hot paths: distance computation, linkage
// clustering, factorization, scoring, and the statistical tests.

#include <benchmark/benchmark.h>

#include <Eigen/Core>
#include <cstdint>
#include <random>
#include <vector>

#include "logtriage/cluster.hpp"
#include "logtriage/dimred.hpp"
#include "logtriage/metrics.hpp"
#include "logtriage/stats.hpp"

using namespace logtriage;

namespace {

Eigen::MatrixXd random_matrix(int rows, int cols, std::uint64_t seed,
                              double lo = 0.1, double hi = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(lo, hi);
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = uni(rng);
    return m;
}

DistanceMatrix random_distances(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 2.0);
    DistanceMatrix d(n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) d.set(i, j, uni(rng));
    return d;
}

std::vector<int> random_partition(int n, int classes, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(0, classes - 1);
    std::vector<int> out(static_cast<size_t>(n));
    for (int& x : out) x = pick(rng);
    return out;
}

void BM_cosine_distance_matrix(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Eigen::MatrixXd rows = random_matrix(n, 40, 7);
    for (auto _ : state) {
        benchmark::DoNotOptimize(cosine_distance_matrix(rows));
    }
}
BENCHMARK(BM_cosine_distance_matrix)->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);

void BM_hac(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto criterion = static_cast<LinkageCriterion>(state.range(1));
    DistanceMatrix d = random_distances(n, 11);
    for (auto _ : state) {
        benchmark::DoNotOptimize(hac(d, criterion));
    }
    state.SetLabel(to_string(criterion));
}
BENCHMARK(BM_hac)
    ->ArgsProduct({{64, 256},
                   {static_cast<long>(LinkageCriterion::Single),
                    static_cast<long>(LinkageCriterion::Complete),
                    static_cast<long>(LinkageCriterion::Average),
                    static_cast<long>(LinkageCriterion::Weighted)}})
    ->Unit(benchmark::kMicrosecond);

void BM_nmf(benchmark::State& state) {
    Eigen::MatrixXd m = random_matrix(128, 40, 13);
    ReductionConfig cfg;
    cfg.method = ReductionMethod::Nmf;
    cfg.seed = 17;
    cfg.nmf_max_iters = static_cast<int>(state.range(0));
    cfg.nmf_tolerance = 0.0;  // fixed work per iteration count
    for (auto _ : state) {
        benchmark::DoNotOptimize(reduce_nmf(m, 8, cfg));
    }
}
BENCHMARK(BM_nmf)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_ami(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    std::vector<int> truth = random_partition(n, 12, 19);
    std::vector<int> pred = random_partition(n, 12, 23);
    for (auto _ : state) {
        benchmark::DoNotOptimize(ami(truth, pred));
    }
}
BENCHMARK(BM_ami)->Arg(100)->Arg(1000)->Unit(benchmark::kMicrosecond);

void BM_friedman(benchmark::State& state) {
    const int blocks = static_cast<int>(state.range(0));
    BlockTable table;
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int t = 0; t < 8; ++t) table.treatments.push_back("t" + std::to_string(t));
    for (int b = 0; b < blocks; ++b) table.blocks.push_back("b" + std::to_string(b));
    table.scores.assign(8, std::vector<double>(static_cast<size_t>(blocks)));
    for (auto& row : table.scores)
        for (double& x : row) x = uni(rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(friedman(table));
    }
}
BENCHMARK(BM_friedman)->Arg(64)->Arg(512)->Unit(benchmark::kMicrosecond);

void BM_wilcoxon_exact(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::vector<double> a(static_cast<size_t>(n)), b(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        a[static_cast<size_t>(i)] = uni(rng);
        b[static_cast<size_t>(i)] = uni(rng);
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            wilcoxon_pratt(a, b, Sidedness::TwoSided, WilcoxonMode::Exact));
    }
}
BENCHMARK(BM_wilcoxon_exact)->Arg(12)->Arg(20)->Unit(benchmark::kMicrosecond);

void BM_wilcoxon_normal(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::vector<double> a(static_cast<size_t>(n)), b(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        a[static_cast<size_t>(i)] = uni(rng);
        b[static_cast<size_t>(i)] = uni(rng);
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            wilcoxon_pratt(a, b, Sidedness::TwoSided, WilcoxonMode::Normal));
    }
}
BENCHMARK(BM_wilcoxon_normal)->Arg(200)->Arg(2000)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
