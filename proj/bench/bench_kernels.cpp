// Parallel kernels vs their serial reference implementations.

#include <benchmark/benchmark.h>

#include <random>

#include "uts/diversity.hpp"
#include "uts/point_cloud.hpp"
#include "uts/retrieval.hpp"
#include "uts/rng.hpp"

namespace {

uts::PointCloud random_cloud(std::size_t n, std::size_t d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    uts::PointCloud cloud;
    cloud.data.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < cloud.data.rows(); ++i)
        for (Eigen::Index j = 0; j < cloud.data.cols(); ++j)
            cloud.data(i, j) = uts::gaussian(rng);
    return cloud;
}

void bm_pairwise_distances(benchmark::State& state) {
    const auto cloud = random_cloud(static_cast<std::size_t>(state.range(0)), 64, 1);
    for (auto _ : state)
        benchmark::DoNotOptimize(
            uts::pairwise_distances(cloud, uts::Metric::Euclidean));
}

void bm_pairwise_distances_serial(benchmark::State& state) {
    const auto cloud = random_cloud(static_cast<std::size_t>(state.range(0)), 64, 1);
    for (auto _ : state)
        benchmark::DoNotOptimize(
            uts::detail::pairwise_distances_serial(cloud, uts::Metric::Euclidean));
}

void bm_dense_retrieve(benchmark::State& state) {
    const auto queries = uts::normalize_rows(random_cloud(64, 64, 2));
    const auto docs = uts::normalize_rows(
        random_cloud(static_cast<std::size_t>(state.range(0)), 64, 3));
    for (auto _ : state)
        benchmark::DoNotOptimize(uts::dense_retrieve(queries, docs, 10));
}

void bm_dense_retrieve_serial(benchmark::State& state) {
    const auto queries = uts::normalize_rows(random_cloud(64, 64, 2));
    const auto docs = uts::normalize_rows(
        random_cloud(static_cast<std::size_t>(state.range(0)), 64, 3));
    for (auto _ : state)
        benchmark::DoNotOptimize(uts::detail::dense_retrieve_serial(queries, docs, 10));
}

void bm_mean_pairwise_similarity(benchmark::State& state) {
    const auto cloud = uts::normalize_rows(
        random_cloud(static_cast<std::size_t>(state.range(0)), 64, 4));
    for (auto _ : state)
        benchmark::DoNotOptimize(uts::mean_pairwise_similarity(
            cloud, uts::SimilarityKernel::Cosine));
}

void bm_mean_pairwise_similarity_serial(benchmark::State& state) {
    const auto cloud = uts::normalize_rows(
        random_cloud(static_cast<std::size_t>(state.range(0)), 64, 4));
    for (auto _ : state)
        benchmark::DoNotOptimize(uts::detail::mean_pairwise_similarity_serial(
            cloud, uts::SimilarityKernel::Cosine));
}

void bm_uniformity(benchmark::State& state) {
    const auto cloud = uts::normalize_rows(
        random_cloud(static_cast<std::size_t>(state.range(0)), 64, 5));
    for (auto _ : state) benchmark::DoNotOptimize(uts::uniformity(cloud, 2.0));
}

void bm_uniformity_serial(benchmark::State& state) {
    const auto cloud = uts::normalize_rows(
        random_cloud(static_cast<std::size_t>(state.range(0)), 64, 5));
    for (auto _ : state)
        benchmark::DoNotOptimize(uts::detail::uniformity_serial(cloud, 2.0));
}

} // namespace

BENCHMARK(bm_pairwise_distances)->Arg(512)->Arg(2048);
BENCHMARK(bm_pairwise_distances_serial)->Arg(512)->Arg(2048);
BENCHMARK(bm_dense_retrieve)->Arg(4096)->Arg(16384);
BENCHMARK(bm_dense_retrieve_serial)->Arg(4096)->Arg(16384);
BENCHMARK(bm_mean_pairwise_similarity)->Arg(512)->Arg(2048);
BENCHMARK(bm_mean_pairwise_similarity_serial)->Arg(512)->Arg(2048);
BENCHMARK(bm_uniformity)->Arg(512)->Arg(2048);
BENCHMARK(bm_uniformity_serial)->Arg(512)->Arg(2048);

BENCHMARK_MAIN();
