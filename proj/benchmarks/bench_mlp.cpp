#include <benchmark/benchmark.h>

#include "le2/policy_learner.hpp"
#include "le2/rng.hpp"

namespace {

le2::LearnerConfig bench_config(int hidden, int batch) {
  le2::LearnerConfig cfg;
  cfg.goal_dim = 50;
  cfg.hidden = hidden;
  cfg.batch_size = batch;
  return cfg;
}

void bm_actor_forward(benchmark::State& state) {
  le2::RngStream rng(1);
  le2::LearnerConfig cfg = bench_config(static_cast<int>(state.range(0)), 1);
  le2::DdpgLearner learner(cfg, rng);
  le2::Obs obs{}, obs0{};
  std::vector<double> goal(cfg.goal_dim, 0.1);
  for (auto _ : state) {
    le2::Action a = learner.act_greedy(obs, obs0, goal);
    benchmark::DoNotOptimize(a);
  }
}
BENCHMARK(bm_actor_forward)->Arg(64)->Arg(256);

void bm_update_step(benchmark::State& state) {
  le2::RngStream rng(2);
  le2::LearnerConfig cfg = bench_config(static_cast<int>(state.range(0)),
                                        static_cast<int>(state.range(1)));
  le2::DdpgLearner learner(cfg, rng);
  std::vector<le2::GoalRecord> goals(4);
  for (auto& g : goals) {
    g.encoding.resize(cfg.goal_dim);
    for (double& v : g.encoding) v = rng.uniform(-1, 1);
  }
  le2::LpTracker lp(5);
  std::vector<le2::TransitionSample> batch(cfg.batch_size);
  for (auto& tr : batch) {
    for (int i = 0; i < le2::kObsDim; ++i) {
      tr.obs_t[i] = rng.uniform(-1, 1);
      tr.obs_0[i] = rng.uniform(-1, 1);
      tr.obs_next[i] = rng.uniform(-1, 1);
    }
  }
  auto mask = [](const le2::TransitionSample&) { return uint64_t{0b0101}; };
  for (auto _ : state) {
    auto aug = learner.hindsight_augment(batch, goals, mask, lp, rng);
    le2::LossReport r = learner.update(aug);
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(bm_update_step)->Args({64, 128})->Args({256, 256})->Unit(benchmark::kMillisecond);

}  // namespace
