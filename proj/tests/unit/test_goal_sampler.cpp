#include <cmath>

#include "doctest.h"
#include "le2/goal_sampler.hpp"
#include "le2/rng.hpp"

using namespace le2;

namespace {

// Drives the sampler into the worked bandit example: freq(d0|g0) = 1.0,
// freq(d1|g0) = 0.5, freq(d0|g1) = 0.5, lifetime counts 10 and 2.
GoalSampler make_worked_example() {
  GoalSampler s(0.2, 100);
  s.update_on_episode(0, {0, 1});
  s.update_on_episode(0, {0});
  for (int i = 0; i < 8; ++i)
    s.update_on_episode(1, i < 4 ? std::vector<int>{0} : std::vector<int>{});
  // noise-targeted episodes: lifetime counts move, confusion stats do not
  for (int i = 0; i < 4; ++i) s.update_on_episode(std::nullopt, {0});
  s.update_on_episode(std::nullopt, {1});
  return s;
}

}  // namespace

TEST_SUITE("goal_sampler") {
  TEST_CASE("value reproduces the worked arithmetic") {
    GoalSampler s = make_worked_example();
    CHECK(s.lifetime_count(0) == 10);
    CHECK(s.lifetime_count(1) == 2);
    CHECK(s.freq(0, 0) == 1.0);
    CHECK(s.freq(1, 0) == 0.5);
    CHECK(s.freq(0, 1) == 0.5);
    CHECK(s.value(0, 2) == doctest::Approx(0.35).epsilon(1e-12));
    CHECK(s.value(1, 2) == doctest::Approx(0.05).epsilon(1e-12));
  }

  TEST_CASE("selection probabilities match the hand computation") {
    GoalSampler s = make_worked_example();
    SelectionDistribution d = s.selection_probabilities(2);
    CHECK(std::abs(d.probabilities[0] - 0.8) < 1e-12);
    CHECK(std::abs(d.probabilities[1] - 0.2) < 1e-12);
  }

  TEST_CASE("degenerate values fall back to uniform") {
    GoalSampler s(0.2, 50);
    for (int g = 0; g < 4; ++g) s.update_on_episode(g, {});  // targeted, nothing achieved
    SelectionDistribution d = s.selection_probabilities(4);
    for (double v : d.values) CHECK(v == 0.0);
    for (double p : d.probabilities) CHECK(p == doctest::Approx(0.25).epsilon(1e-12));

    GoalSampler single(0.2, 50);
    single.update_on_episode(0, {0});
    CHECK(single.selection_probabilities(1).probabilities[0] == doctest::Approx(1.0));
    CHECK(single.value(0, 1) == doctest::Approx(1.0));  // described once, always achieved
  }

  TEST_CASE("probabilities sum to one and respect the floor on random instances") {
    RngStream rng(31);
    for (int trial = 0; trial < 200; ++trial) {
      int n = 1 + rng.uniform_int(12);
      GoalSampler s(0.2, 20);
      int episodes = rng.uniform_int(60);
      for (int e = 0; e < episodes; ++e) {
        int target = rng.uniform_int(n);
        std::vector<int> achieved;
        for (int g = 0; g < n; ++g)
          if (rng.uniform() < 0.3) achieved.push_back(g);
        s.update_on_episode(target, achieved);
      }
      SelectionDistribution d = s.selection_probabilities(n);
      double sum = 0.0;
      for (double p : d.probabilities) {
        CHECK(p >= 0.2 / n - 1e-12);
        sum += p;
      }
      CHECK(std::abs(sum - 1.0) < 1e-9);
    }
  }

  TEST_CASE("mastering a goal drains value from targets that reach it") {
    GoalSampler s = make_worked_example();
    double before = s.value(0, 2);  // freq(d1|g0) = 0.5 > 0
    for (int i = 0; i < 20; ++i) s.update_on_episode(std::nullopt, {1});
    double after = s.value(0, 2);
    CHECK(after < before);

    // goals it never reaches are unaffected
    GoalSampler t = make_worked_example();
    double v1_before = t.value(1, 2);  // freq(d1|g1) = 0
    for (int i = 0; i < 20; ++i) t.update_on_episode(std::nullopt, {1});
    CHECK(t.value(1, 2) == doctest::Approx(v1_before));
  }

  TEST_CASE("never-targeted goals get the current maximum value") {
    GoalSampler s(0.2, 100);
    s.update_on_episode(0, {0});
    s.update_on_episode(std::nullopt, {1});  // discover goal 1 without targeting it
    double v0 = s.value(0, 2);
    CHECK(v0 > 0.0);
    CHECK(s.value(1, 2) == doctest::Approx(v0));
  }

  TEST_CASE("sample_target: noise goal when empty, the single goal otherwise") {
    GoalSampler s(0.2, 100);
    RngStream rng(8);
    std::vector<GoalRecord> none;
    TargetChoice noise = s.sample_target(none, 50, rng);
    CHECK_FALSE(noise.goal_id.has_value());
    REQUIRE(noise.encoding.size() == 50);
    for (double v : noise.encoding) {
      CHECK(v >= -1.0);
      CHECK(v <= 1.0);
    }

    std::vector<GoalRecord> one(1);
    one[0].goal_id = 0;
    one[0].encoding = {1.0, 2.0};
    s.update_on_episode(0, {0});
    TargetChoice pick = s.sample_target(one, 2, rng);
    REQUIRE(pick.goal_id.has_value());
    CHECK(*pick.goal_id == 0);
    CHECK(pick.encoding == one[0].encoding);
  }

  TEST_CASE("seeded target sequences are reproducible") {
    auto run = [] {
      GoalSampler s = make_worked_example();
      RngStream rng(5);
      std::vector<GoalRecord> goals(2);
      goals[0].encoding = {0.0};
      goals[1].encoding = {1.0};
      std::vector<int> picks;
      for (int i = 0; i < 50; ++i) picks.push_back(*s.sample_target(goals, 1, rng).goal_id);
      return picks;
    };
    CHECK(run() == run());
  }

  TEST_CASE("json state round-trips") {
    GoalSampler s = make_worked_example();
    GoalSampler back = GoalSampler::from_json_string(s.to_json_string());
    CHECK(back.value(0, 2) == s.value(0, 2));
    CHECK(back.value(1, 2) == s.value(1, 2));
    CHECK(back.lifetime_count(0) == s.lifetime_count(0));
    CHECK(back.freq(1, 0) == s.freq(1, 0));
  }
}
