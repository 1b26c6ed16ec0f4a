#include <map>
#include <set>

#include "doctest.h"
#include "le2/memory.hpp"
#include "le2/rng.hpp"

using namespace le2;

namespace {

EpisodeRecord make_episode(int64_t id, std::vector<int> achieved, int T = 5) {
  EpisodeRecord e;
  e.episode_id = id;
  e.observations.resize(T + 1);
  for (int t = 0; t <= T; ++t) e.observations[t][0] = static_cast<double>(id * 1000 + t);
  e.actions.resize(T);
  e.achieved_goal_ids = std::move(achieved);
  return e;
}

// ground-truth rebuild of the goal index mapping
void audit(const ReplayMemory& mem) {
  std::map<int, std::set<int64_t>> expected;
  for (const EpisodeRecord& e : mem.episodes())
    for (int g : e.achieved_goal_ids) expected[g].insert(e.episode_id);
  std::map<int, std::set<int64_t>> actual;
  for (const auto& [g, buf] : mem.goal_buffers()) actual[g] = {buf.begin(), buf.end()};
  REQUIRE(expected == actual);
}

}  // namespace

TEST_SUITE("memory") {
  TEST_CASE("store updates the achieving goal's buffer only") {
    ReplayMemory mem(100);
    mem.store_episode(make_episode(0, {3}));
    CHECK(mem.goal_buffers().at(3).size() == 1);
    mem.store_episode(make_episode(1, {}));
    CHECK(mem.size() == 2);
    CHECK(mem.goal_buffers().size() == 1);
  }

  TEST_CASE("FIFO eviction purges every buffer") {
    ReplayMemory mem(2);
    mem.store_episode(make_episode(0, {1, 2}));
    mem.store_episode(make_episode(1, {1}));
    mem.store_episode(make_episode(2, {2}));
    CHECK(mem.size() == 2);
    for (const EpisodeRecord& e : mem.episodes()) CHECK(e.episode_id != 0);
    CHECK(mem.goal_buffers().at(1) == std::deque<int64_t>{1});
    CHECK(mem.goal_buffers().at(2) == std::deque<int64_t>{2});
    audit(mem);
  }

  TEST_CASE("lifetime counts survive eviction and never decrease") {
    ReplayMemory mem(2);
    for (int i = 0; i < 5; ++i) mem.store_episode(make_episode(i, {0}));
    CHECK(mem.reward_counts().at(0) == 5);
    CHECK(mem.reward_counts().count(7) == 0);
    mem.store_episode(make_episode(5, {7}));
    CHECK(mem.reward_counts().at(0) == 5);  // evictions did not reduce it
    CHECK(mem.reward_counts().at(7) == 1);
  }

  TEST_CASE("sampling requires content and returns well-formed transitions") {
    ReplayMemory mem(10);
    RngStream rng(1);
    CHECK_THROWS(mem.sample_transitions(1, rng));
    mem.store_episode(make_episode(0, {2}, 4));
    auto samples = mem.sample_transitions(100, rng);
    REQUIRE(samples.size() == 100);
    for (const TransitionSample& s : samples) {
      CHECK(s.source_episode == 0);
      CHECK(s.t >= 0);
      CHECK(s.t < 4);
      CHECK(s.obs_0[0] == 0.0);
      CHECK(s.obs_t[0] == doctest::Approx(s.t));
      CHECK(s.obs_next[0] == doctest::Approx(s.t + 1));
      CHECK(s.done == (s.t == 3));
    }
    CHECK(mem.sample_transitions(0, rng).empty());
  }

  TEST_CASE("two-stage choice balances rare goals") {
    // goal A: 1000 episodes; goal B: 1. Buffer set = {A, B, main}; the chance
    // of drawing via B's buffer is 1/3.
    ReplayMemory mem(2000);
    for (int i = 0; i < 1000; ++i) mem.store_episode(make_episode(i, {0}));
    mem.store_episode(make_episode(1000, {1}));
    RngStream rng(99);
    const int n = 10000;
    int via_b = 0;
    for (const TransitionSample& s : mem.sample_transitions(n, rng))
      via_b += s.source_goal_buffer == 1;
    double frac = static_cast<double>(via_b) / n;
    CHECK(frac == doctest::Approx(1.0 / 3.0).epsilon(0.06));  // 3 sigma ~ 0.014 absolute
    CHECK(std::abs(frac - 1.0 / 3.0) < 0.02);
  }

  TEST_CASE("index audit under randomized store sequences") {
    ReplayMemory mem(50);
    RngStream rng(7);
    int64_t next_id = 0;
    for (int round = 0; round < 300; ++round) {
      std::vector<int> achieved;
      for (int g = 0; g < 6; ++g)
        if (rng.uniform() < 0.3) achieved.push_back(g);
      mem.store_episode(make_episode(next_id++, achieved));
    }
    CHECK(mem.size() == 50);
    audit(mem);
  }
}
