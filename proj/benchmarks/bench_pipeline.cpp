#include <benchmark/benchmark.h>

#include "easics/consensus.hpp"
#include "easics/dataset.hpp"
#include "easics/ensemble.hpp"
#include "easics/lle.hpp"
#include "easics/metrics.hpp"
#include "easics/som.hpp"

namespace {

easics::SampleMatrix cohort(std::size_t subjects, std::size_t features) {
    easics::SyntheticSpec spec;
    spec.n_subjects = subjects;
    spec.n_features = features;
    spec.n_true_clusters = 4;
    spec.cluster_separation = 10.0;
    spec.seed = 1;
    return easics::generate_synthetic(spec).data;
}

easics::Embedding embedded(std::size_t subjects) {
    return easics::lle(cohort(subjects, 40), easics::LleParams{20, 10, 1e-3});
}

void BM_KnnGraph(benchmark::State& state) {
    const auto data = cohort(static_cast<std::size_t>(state.range(0)), 40);
    for (auto _ : state) {
        auto g = easics::knn_graph(data, 20);
        benchmark::DoNotOptimize(g);
    }
}
BENCHMARK(BM_KnnGraph)->Arg(57)->Arg(171);

void BM_ReconstructionWeights(benchmark::State& state) {
    const auto data = cohort(static_cast<std::size_t>(state.range(0)), 40);
    const auto g = easics::knn_graph(data, 20);
    for (auto _ : state) {
        auto w = easics::reconstruction_weights(data, g, 1e-3);
        benchmark::DoNotOptimize(w);
    }
}
BENCHMARK(BM_ReconstructionWeights)->Arg(57)->Arg(171);

void BM_Embed(benchmark::State& state) {
    const auto data = cohort(static_cast<std::size_t>(state.range(0)), 40);
    const auto g = easics::knn_graph(data, 20);
    const auto w = easics::reconstruction_weights(data, g, 1e-3);
    for (auto _ : state) {
        auto e = easics::embed(w, 10);
        benchmark::DoNotOptimize(e);
    }
}
BENCHMARK(BM_Embed)->Arg(57)->Arg(171);

void BM_TrainSom(benchmark::State& state) {
    const auto data = embedded(57);
    easics::SomConfig cfg;
    cfg.iter_max = static_cast<std::size_t>(state.range(0));
    cfg.seed = 3;
    for (auto _ : state) {
        auto model = easics::train_som(data, cfg);
        benchmark::DoNotOptimize(model);
    }
}
BENCHMARK(BM_TrainSom)->Arg(1000)->Arg(10000);

void BM_Ensemble(benchmark::State& state) {
    const auto data = embedded(57);
    easics::SomConfig cfg;
    cfg.iter_max = 2000;
    for (auto _ : state) {
        auto ps = easics::run_ensemble(data, data.subject_ids,
                                       static_cast<std::size_t>(state.range(0)), 0.099, cfg, 5);
        benchmark::DoNotOptimize(ps);
    }
}
BENCHMARK(BM_Ensemble)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_CoAssociation(benchmark::State& state) {
    const auto data = embedded(57);
    easics::SomConfig cfg;
    cfg.iter_max = 2000;
    const auto ps = easics::run_ensemble(data, data.subject_ids, 50, 0.099, cfg, 5);
    for (auto _ : state) {
        auto w = easics::co_association(ps);
        benchmark::DoNotOptimize(w);
    }
}
BENCHMARK(BM_CoAssociation);

void BM_SpectralPartition(benchmark::State& state) {
    const auto data = embedded(57);
    easics::SomConfig cfg;
    cfg.iter_max = 2000;
    const auto ps = easics::run_ensemble(data, data.subject_ids, 50, 0.099, cfg, 5);
    const auto w = easics::co_association(ps);
    for (auto _ : state) {
        auto p = easics::spectral_partition(w, 4, 7);
        benchmark::DoNotOptimize(p);
    }
}
BENCHMARK(BM_SpectralPartition);

void BM_Silhouette(benchmark::State& state) {
    const auto data = embedded(57);
    const auto p = easics::kmeans(data.values, 4, 11);
    for (auto _ : state) {
        auto s = easics::silhouette(data.values, p);
        benchmark::DoNotOptimize(s);
    }
}
BENCHMARK(BM_Silhouette);

} // namespace

BENCHMARK_MAIN();
