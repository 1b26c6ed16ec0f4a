#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "le2/rng.hpp"
#include "le2/types.hpp"

namespace le2 {

struct EpisodeRecord {
  int64_t episode_id = 0;
  std::vector<Obs> observations;  // T+1
  std::vector<Action> actions;    // T
  std::optional<int> targeted_goal;
  std::vector<int> achieved_goal_ids;  // sorted, unique
};

struct TransitionSample {
  Obs obs_t{};
  Obs obs_0{};  // episode-initial observation
  Action action{};
  Obs obs_next{};
  int64_t source_episode = 0;
  int source_goal_buffer = -1;  // -1 = the main buffer
  int t = 0;
  bool done = false;  // t == T-1
};

// Episode replay with per-goal index buffers. Sampling picks uniformly among
// {non-empty goal buffers} + {the main buffer}, then an episode within the
// buffer, then a timestep, which balances transitions across easy and hard
// goals. Lifetime per-goal reward counts survive FIFO eviction.
class ReplayMemory {
 public:
  explicit ReplayMemory(std::size_t capacity);

  void store_episode(EpisodeRecord record);
  std::vector<TransitionSample> sample_transitions(int n, RngStream& rng) const;

  // goal_id -> number of episodes ever stored that achieved it (never decreases)
  const std::map<int, int64_t>& reward_counts() const { return lifetime_counts_; }

  std::size_t size() const { return episodes_.size(); }
  std::size_t capacity() const { return capacity_; }
  const std::deque<EpisodeRecord>& episodes() const { return episodes_; }
  const std::map<int, std::deque<int64_t>>& goal_buffers() const { return buffers_; }

  void set_lifetime_counts(std::map<int, int64_t> counts);  // checkpoint restore

 private:
  const EpisodeRecord& episode_by_id(int64_t id) const;

  std::size_t capacity_;
  std::deque<EpisodeRecord> episodes_;
  std::unordered_map<int64_t, std::size_t> insertion_index_;  // episode_id -> running index
  std::size_t evicted_ = 0;
  std::size_t stored_ = 0;
  std::map<int, std::deque<int64_t>> buffers_;  // non-empty goal buffers only
  std::map<int, int64_t> lifetime_counts_;
};

// Trajectory export: JSON-lines, one episode per line with fields
// {episode_id, observations[T+1][17], actions[T][4]} plus, for memory dumps,
// achieved_goal_ids and targeted_goal.
void write_trajectories(const std::filesystem::path& path, std::span<const EpisodeRecord> episodes);
void append_trajectory(std::ostream& out, const EpisodeRecord& episode);
std::vector<EpisodeRecord> read_trajectories(const std::filesystem::path& path);

}  // namespace le2
