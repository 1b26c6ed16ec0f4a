#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "le2/language.hpp"
#include "le2/rng.hpp"
#include "le2/types.hpp"

namespace le2 {

struct SelectionDistribution {
  std::vector<double> values;         // indexed by goal id
  std::vector<double> probabilities;  // sums to 1
};

struct TargetChoice {
  std::optional<int> goal_id;       // nullopt = noise goal
  std::vector<double> encoding;
};

// Intrinsic motivation #1: a bandit over discovered goals that maximizes
// expected trajectory quality. value(g) = sum_i freq(d_i | g) * rarity(g_i),
// with rarity the inverse lifetime description count; targets are drawn with an
// epsilon-greedy probability-matching rule. Also owns the goal confusion
// statistics (freq of reaching goal i when targeting goal t, over a sliding
// window of recent episodes per target).
class GoalSampler {
 public:
  GoalSampler(double epsilon_target, int window);

  // Push an episode outcome. Confusion stats only move when a discovered goal
  // was targeted; lifetime description counts move either way.
  void update_on_episode(std::optional<int> targeted, const std::vector<int>& achieved);

  double rarity(int goal_id) const;
  int64_t lifetime_count(int goal_id) const;
  double freq(int reached_goal, int targeted_goal) const;

  // Never-targeted goals get an optimistic value equal to the current maximum
  // over targeted goals, so fresh discoveries are tried promptly.
  double value(int goal_id, int n_goals) const;
  SelectionDistribution selection_probabilities(int n_goals) const;

  TargetChoice sample_target(std::span<const GoalRecord> goals, int noise_dim,
                             RngStream& rng) const;

  double epsilon_target() const { return epsilon_target_; }
  int window() const { return window_; }

  // checkpoint support
  std::string to_json_string() const;
  static GoalSampler from_json_string(const std::string& text);
  void add_lifetime_counts(const std::map<int, int64_t>& delta);
  const std::map<int, int64_t>& lifetime_counts() const { return lifetime_counts_; }

 private:
  struct Window {
    std::deque<std::vector<int>> entries;
    std::map<int, int> reached_counts;
  };

  double raw_value(const Window& w) const;

  double epsilon_target_;
  int window_;
  std::map<int, Window> confusion_;  // keyed by targeted goal
  std::map<int, int64_t> lifetime_counts_;
};

}  // namespace le2
