#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "le2/env.hpp"
#include "le2/policy_learner.hpp"
#include "le2/reward_model.hpp"
#include "le2/types.hpp"

namespace le2 {

struct SamplerConfig {
  double epsilon_target = 0.2;
  int window = 100;
};

struct MemoryConfig {
  int64_t capacity = 10000;  // episodes per worker
};

struct RunConfig {
  uint64_t seed = 1;
  int workers = 2;
  int64_t total_episodes = 0;  // per worker
  std::string embeddings_path;
  std::string output_dir = "le2_run";
  bool use_oracle_reward = false;               // TR-agent ablation
  std::optional<std::vector<int>> goal_subset;  // restricts the SP's catalog
  int64_t eval_cadence = 600;                   // episodes between offline evals (per worker)
  int eval_episodes_per_goal = 5;
  int64_t checkpoint_cadence = 0;  // 0 = checkpoint at run end only
  bool dump_trajectories = false;

  EnvConfig env;
  SamplerConfig sampler;
  RewardModelConfig reward;
  LearnerConfig learner;
  MemoryConfig memory;

  void validate() const;  // throws ConfigError

  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::filesystem::path& toml_path);

  // LE2_-prefixed environment variable overrides (seed, workers,
  // total_episodes, output_dir, embeddings_path, use_oracle_reward,
  // eval_cadence); applied after file values, before CLI flags.
  void apply_env_overrides();
};

// "0..8", "3", "0,2,4" and combinations thereof -> sorted unique id list
std::vector<int> parse_goal_subset(const std::string& text);

}  // namespace le2
