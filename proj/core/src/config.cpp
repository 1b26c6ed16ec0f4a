#include "le2/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>

#include "le2/toml_lite.hpp"

namespace le2 {
namespace {

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void read_vec2(const nlohmann::json& j, const char* key, Vec2& out) {
  if (!j.contains(key)) return;
  const auto& a = j.at(key);
  if (!a.is_array() || a.size() != 2) throw ConfigError(std::string("config: ") + key + " must be [x, y]");
  out = Vec2{a[0].get<double>(), a[1].get<double>()};
}

}  // namespace

void RunConfig::validate() const {
  if (workers < 1 || workers > 16) throw ConfigError("config: workers must be in [1, 16]");
  if (total_episodes < 0) throw ConfigError("config: total_episodes must be >= 0");
  if (eval_cadence <= 0) throw ConfigError("config: eval_cadence must be positive");
  if (reward.refit_cadence <= 0) throw ConfigError("config: reward refit_cadence must be positive");
  if (checkpoint_cadence < 0) throw ConfigError("config: checkpoint_cadence must be >= 0");
  if (eval_episodes_per_goal < 0) throw ConfigError("config: eval_episodes_per_goal must be >= 0");
  if (embeddings_path.empty()) throw ConfigError("config: embeddings_path is required");
  if (output_dir.empty()) throw ConfigError("config: output_dir is required");
  if (goal_subset) {
    if (goal_subset->empty()) throw ConfigError("config: goal_subset cannot be empty");
    for (int id : *goal_subset)
      if (id < 0 || id >= kCatalogSize)
        throw ConfigError("config: goal_subset ids must be in [0, 51)");
  }
  if (memory.capacity <= 0) throw ConfigError("config: memory capacity must be positive");
  if (learner.batch_size <= 0 || learner.hidden <= 0 || learner.update_cycles < 0 ||
      learner.updates_per_cycle < 0)
    throw ConfigError("config: bad learner shape");
  if (learner.rho_positive < 0.0 || learner.rho_positive > 1.0)
    throw ConfigError("config: rho_positive must be in [0, 1]");
  if (learner.epsilon_replay < 0.0 || learner.epsilon_replay > 1.0)
    throw ConfigError("config: epsilon_replay must be in [0, 1]");
  if (sampler.epsilon_target < 0.0 || sampler.epsilon_target > 1.0)
    throw ConfigError("config: epsilon_target must be in [0, 1]");
  if (sampler.window <= 0) throw ConfigError("config: sampler window must be positive");
  if (reward.per_goal_cap <= 0) throw ConfigError("config: per_goal_cap must be positive");
  if (reward.min_positive_fraction < 0.0 || reward.min_positive_fraction >= 1.0)
    throw ConfigError("config: min_positive_fraction must be in [0, 1)");
  env.validate();
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j;
  j["seed"] = seed;
  j["workers"] = workers;
  j["total_episodes"] = total_episodes;
  j["embeddings_path"] = embeddings_path;
  j["output_dir"] = output_dir;
  j["use_oracle_reward"] = use_oracle_reward;
  if (goal_subset) j["goal_subset"] = *goal_subset;
  j["eval_cadence"] = eval_cadence;
  j["eval_episodes_per_goal"] = eval_episodes_per_goal;
  j["checkpoint_cadence"] = checkpoint_cadence;
  j["dump_trajectories"] = dump_trajectories;

  j["env"] = {{"link_lengths", env.link_lengths},
              {"stick_length", env.stick_length},
              {"grab_radius", env.grab_radius},
              {"attach_radius", env.attach_radius},
              {"max_joint_step", env.max_joint_step},
              {"episode_length", env.episode_length},
              {"initial_joints", env.initial_joints},
              {"handle1", {env.handle_init[0].x, env.handle_init[0].y}},
              {"handle2", {env.handle_init[1].x, env.handle_init[1].y}},
              {"tip_angle1", env.tip_angle_init[0]},
              {"tip_angle2", env.tip_angle_init[1]},
              {"object1", {env.object_init[0].x, env.object_init[0].y}},
              {"object2", {env.object_init[1].x, env.object_init[1].y}}};
  j["sampler"] = {{"epsilon_target", sampler.epsilon_target}, {"window", sampler.window}};
  j["reward_model"] = {{"refit_cadence", reward.refit_cadence},
                       {"per_goal_cap", reward.per_goal_cap},
                       {"min_positive_fraction", reward.min_positive_fraction},
                       {"n_trees", reward.forest.n_trees},
                       {"max_depth", reward.forest.max_depth},
                       {"min_samples_leaf", reward.forest.min_samples_leaf},
                       {"features_per_split", reward.forest.features_per_split},
                       {"bootstrap", reward.forest.bootstrap}};
  j["learner"] = {{"goal_dim", learner.goal_dim},
                  {"hidden", learner.hidden},
                  {"gamma", learner.gamma},
                  {"tau", learner.tau},
                  {"actor_lr", learner.actor_lr},
                  {"critic_lr", learner.critic_lr},
                  {"noise_scale", learner.noise_scale},
                  {"epsilon_random", learner.epsilon_random},
                  {"action_l2", learner.action_l2},
                  {"batch_size", learner.batch_size},
                  {"rho_positive", learner.rho_positive},
                  {"epsilon_replay", learner.epsilon_replay},
                  {"update_cycles", learner.update_cycles},
                  {"updates_per_cycle", learner.updates_per_cycle},
                  {"self_eval_rollouts", learner.self_eval_rollouts},
                  {"lp_window", learner.lp_window}};
  j["memory"] = {{"capacity", memory.capacity}};
  return j;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  RunConfig c;
  read(j, "seed", c.seed);
  read(j, "workers", c.workers);
  read(j, "total_episodes", c.total_episodes);
  read(j, "embeddings_path", c.embeddings_path);
  read(j, "output_dir", c.output_dir);
  read(j, "use_oracle_reward", c.use_oracle_reward);
  if (j.contains("goal_subset")) c.goal_subset = j.at("goal_subset").get<std::vector<int>>();
  read(j, "eval_cadence", c.eval_cadence);
  read(j, "eval_episodes_per_goal", c.eval_episodes_per_goal);
  read(j, "checkpoint_cadence", c.checkpoint_cadence);
  read(j, "dump_trajectories", c.dump_trajectories);

  if (j.contains("env")) {
    const auto& e = j.at("env");
    if (e.contains("link_lengths")) {
      auto v = e.at("link_lengths").get<std::vector<double>>();
      if (v.size() != 3) throw ConfigError("config: link_lengths must have 3 entries");
      std::copy(v.begin(), v.end(), c.env.link_lengths.begin());
    }
    read(e, "stick_length", c.env.stick_length);
    read(e, "grab_radius", c.env.grab_radius);
    read(e, "attach_radius", c.env.attach_radius);
    read(e, "max_joint_step", c.env.max_joint_step);
    read(e, "episode_length", c.env.episode_length);
    if (e.contains("initial_joints")) {
      auto v = e.at("initial_joints").get<std::vector<double>>();
      if (v.size() != 3) throw ConfigError("config: initial_joints must have 3 entries");
      std::copy(v.begin(), v.end(), c.env.initial_joints.begin());
    }
    read_vec2(e, "handle1", c.env.handle_init[0]);
    read_vec2(e, "handle2", c.env.handle_init[1]);
    read_vec2(e, "object1", c.env.object_init[0]);
    read_vec2(e, "object2", c.env.object_init[1]);
    if (e.contains("tip_angle1")) c.env.tip_angle_init[0] = e.at("tip_angle1").get<double>();
    else c.env.tip_angle_init[0] = std::atan2(c.env.handle_init[0].y, c.env.handle_init[0].x);
    if (e.contains("tip_angle2")) c.env.tip_angle_init[1] = e.at("tip_angle2").get<double>();
    else c.env.tip_angle_init[1] = std::atan2(c.env.handle_init[1].y, c.env.handle_init[1].x);
  }
  if (j.contains("sampler")) {
    const auto& s = j.at("sampler");
    read(s, "epsilon_target", c.sampler.epsilon_target);
    read(s, "window", c.sampler.window);
  }
  if (j.contains("reward_model")) {
    const auto& r = j.at("reward_model");
    read(r, "refit_cadence", c.reward.refit_cadence);
    read(r, "per_goal_cap", c.reward.per_goal_cap);
    read(r, "min_positive_fraction", c.reward.min_positive_fraction);
    read(r, "n_trees", c.reward.forest.n_trees);
    read(r, "max_depth", c.reward.forest.max_depth);
    read(r, "min_samples_leaf", c.reward.forest.min_samples_leaf);
    read(r, "features_per_split", c.reward.forest.features_per_split);
    read(r, "bootstrap", c.reward.forest.bootstrap);
  }
  if (j.contains("learner")) {
    const auto& l = j.at("learner");
    read(l, "goal_dim", c.learner.goal_dim);
    read(l, "hidden", c.learner.hidden);
    read(l, "gamma", c.learner.gamma);
    read(l, "tau", c.learner.tau);
    read(l, "actor_lr", c.learner.actor_lr);
    read(l, "critic_lr", c.learner.critic_lr);
    read(l, "noise_scale", c.learner.noise_scale);
    read(l, "epsilon_random", c.learner.epsilon_random);
    read(l, "action_l2", c.learner.action_l2);
    read(l, "batch_size", c.learner.batch_size);
    read(l, "rho_positive", c.learner.rho_positive);
    read(l, "epsilon_replay", c.learner.epsilon_replay);
    read(l, "update_cycles", c.learner.update_cycles);
    read(l, "updates_per_cycle", c.learner.updates_per_cycle);
    read(l, "self_eval_rollouts", c.learner.self_eval_rollouts);
    read(l, "lp_window", c.learner.lp_window);
  }
  if (j.contains("memory")) read(j.at("memory"), "capacity", c.memory.capacity);
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& toml_path) {
  return from_json(parse_toml_file(toml_path));
}

void RunConfig::apply_env_overrides() {
  auto get = [](const char* name) -> std::optional<std::string> {
    const char* v = std::getenv(name);
    if (!v) return std::nullopt;
    return std::string(v);
  };
  try {
    if (auto v = get("LE2_SEED")) seed = std::stoull(*v);
    if (auto v = get("LE2_WORKERS")) workers = std::stoi(*v);
    if (auto v = get("LE2_TOTAL_EPISODES")) total_episodes = std::stoll(*v);
    if (auto v = get("LE2_OUTPUT_DIR")) output_dir = *v;
    if (auto v = get("LE2_EMBEDDINGS_PATH")) embeddings_path = *v;
    if (auto v = get("LE2_EVAL_CADENCE")) eval_cadence = std::stoll(*v);
    if (auto v = get("LE2_USE_ORACLE_REWARD")) use_oracle_reward = (*v == "1" || *v == "true");
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: bad LE2_* environment override: ") + e.what());
  }
}

std::vector<int> parse_goal_subset(const std::string& text) {
  std::set<int> ids;
  std::size_t i = 0;
  auto parse_int = [&]() {
    std::size_t start = i;
    while (i < text.size() && (std::isdigit(static_cast<unsigned char>(text[i])))) ++i;
    if (i == start) throw ConfigError("goal-subset: expected a number in '" + text + "'");
    return std::stoi(text.substr(start, i - start));
  };
  while (i < text.size()) {
    int lo = parse_int();
    int hi = lo;
    if (i + 1 < text.size() && text[i] == '.' && text[i + 1] == '.') {
      i += 2;
      hi = parse_int();
    }
    if (hi < lo) throw ConfigError("goal-subset: descending range in '" + text + "'");
    for (int v = lo; v <= hi; ++v) ids.insert(v);
    if (i < text.size()) {
      if (text[i] != ',') throw ConfigError("goal-subset: expected ',' in '" + text + "'");
      ++i;
    }
  }
  if (ids.empty()) throw ConfigError("goal-subset: empty expression");
  return std::vector<int>(ids.begin(), ids.end());
}

}  // namespace le2
