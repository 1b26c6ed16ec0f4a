#include <benchmark/benchmark.h>

#include "le2/random_forest.hpp"
#include "le2/rng.hpp"

namespace {

// feature shape mirrors the reward model: 34 observation features + 50 goal dims
constexpr int kDim = 84;

std::pair<std::vector<double>, std::vector<int>> synthetic(int n, le2::RngStream& rng) {
  std::vector<double> X;
  X.reserve(static_cast<std::size_t>(n) * kDim);
  std::vector<int> y;
  for (int i = 0; i < n; ++i) {
    double key = 0.0;
    for (int f = 0; f < kDim; ++f) {
      double v = rng.uniform(-1, 1);
      if (f == 3 || f == 20) key += v;
      X.push_back(v);
    }
    y.push_back(key > 0 ? 1 : 0);
  }
  return {X, y};
}

void bm_forest_fit(benchmark::State& state) {
  le2::RngStream rng(1);
  auto [X, y] = synthetic(static_cast<int>(state.range(0)), rng);
  le2::ForestHyperparams hp;
  hp.n_trees = 50;
  hp.max_depth = 10;
  for (auto _ : state) {
    le2::RandomForest f = le2::RandomForest::fit(X, y, kDim, hp, 7);
    benchmark::DoNotOptimize(f);
  }
}
BENCHMARK(bm_forest_fit)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

void bm_forest_predict(benchmark::State& state) {
  le2::RngStream rng(2);
  auto [X, y] = synthetic(2000, rng);
  le2::ForestHyperparams hp;
  hp.n_trees = 50;
  hp.max_depth = 10;
  le2::RandomForest f = le2::RandomForest::fit(X, y, kDim, hp, 7);
  std::vector<double> probe(kDim);
  for (double& v : probe) v = rng.uniform(-1, 1);
  for (auto _ : state) {
    int p = f.predict(probe);
    benchmark::DoNotOptimize(p);
  }
}
BENCHMARK(bm_forest_predict);

}  // namespace
