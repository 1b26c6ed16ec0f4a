#include <benchmark/benchmark.h>

#include "le2/env.hpp"
#include "le2/rng.hpp"
#include "le2/social_partner.hpp"

namespace {

void bm_env_step(benchmark::State& state) {
  le2::ArmToolsToys env;
  le2::RngStream rng(1);
  le2::WorldState s = env.initial_state();
  for (auto _ : state) {
    le2::Action a{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1),
                  rng.uniform(-1, 1)};
    s = env.step(s, a);
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(bm_env_step);

void bm_describe(benchmark::State& state) {
  le2::SocialPartner sp;
  le2::ArmToolsToys env;
  le2::RngStream rng(2);
  le2::Obs a = env.reset(), b = env.reset();
  for (int i = 0; i < le2::kObsDim; ++i) b[i] += rng.uniform(-0.5, 0.5);
  for (auto _ : state) {
    auto ids = sp.describe_ids(a, b);
    benchmark::DoNotOptimize(ids);
  }
}
BENCHMARK(bm_describe);

}  // namespace
