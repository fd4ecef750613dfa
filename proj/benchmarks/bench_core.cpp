#include <benchmark/benchmark.h>

#include <random>

#include "parcelsense/forest.hpp"
#include "parcelsense/labeler.hpp"
#include "parcelsense/sampler.hpp"
#include "parcelsense/semantics.hpp"
#include "parcelsense/synthcity.hpp"

using namespace parcelsense;

namespace {

const Scene& benchmark_scene() {
  static const Scene scene = generate_scene(default_benchmark(1));
  return scene;
}

void BM_SampleWindows(benchmark::State& state) {
  const Scene& scene = benchmark_scene();
  const ParcelIndex index = build_parcel_records(scene.parcels, &scene.labels);
  SamplerConfig cfg;
  cfg.attempts = static_cast<int>(state.range(0));
  std::size_t windows = 0;
  for (auto _ : state) {
    for (const auto& rec : index.records) windows += sample_windows(scene.parcels, rec, cfg).size();
    ++cfg.seed;
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * index.records.size()));
  benchmark::DoNotOptimize(windows);
}
BENCHMARK(BM_SampleWindows)->Arg(100)->Arg(300)->Unit(benchmark::kMillisecond);

void BM_Featurize(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  RasterGrid r(side, side, 3);
  std::mt19937 rng(1);
  for (auto& p : r.pixels) p = static_cast<std::uint8_t>(rng());
  for (auto _ : state) benchmark::DoNotOptimize(featurize(r));
}
BENCHMARK(BM_Featurize)->Arg(20)->Arg(64)->Arg(200);

void BM_Tfidf(benchmark::State& state) {
  const auto parcels = static_cast<std::size_t>(state.range(0));
  WordFrequencyTable t;
  for (int i = 0; i < 13; ++i) t.vocabulary.push_back("w" + std::to_string(i));
  std::mt19937 rng(2);
  for (std::size_t p = 0; p < parcels; ++p) {
    t.parcel_ids.push_back(static_cast<ParcelId>(p + 1));
    std::vector<std::size_t> row(13);
    for (auto& c : row) c = rng() % 3 == 0 ? rng() % 40 : 0;
    t.counts.push_back(row);
  }
  for (auto _ : state) benchmark::DoNotOptimize(tfidf_features(t, corpus_stats(t)));
}
BENCHMARK(BM_Tfidf)->Arg(200)->Arg(5000);

void BM_TrainForest(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  std::vector<std::vector<double>> x;
  std::vector<LandUseLabel> y;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(13);
    for (auto& v : row) v = n01(rng);
    const LandUseLabel l = kAllLandUse[i % kLandUseCount];
    row[index_of(l)] += 2.0;
    x.push_back(row);
    y.push_back(l);
  }
  ForestConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(train_forest(x, y, cfg));
    ++cfg.seed;
  }
}
BENCHMARK(BM_TrainForest)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
