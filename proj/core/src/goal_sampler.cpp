#include "le2/goal_sampler.hpp"

#include <algorithm>
#include <stdexcept>

#include "json.hpp"

namespace le2 {

GoalSampler::GoalSampler(double epsilon_target, int window)
    : epsilon_target_(epsilon_target), window_(window) {
  if (epsilon_target_ < 0.0 || epsilon_target_ > 1.0)
    throw ConfigError("goal sampler: epsilon_target must be in [0, 1]");
  if (window_ <= 0) throw ConfigError("goal sampler: window must be positive");
}

void GoalSampler::update_on_episode(std::optional<int> targeted,
                                    const std::vector<int>& achieved) {
  if (targeted) {
    Window& w = confusion_[*targeted];
    w.entries.push_back(achieved);
    for (int g : achieved) ++w.reached_counts[g];
    if (static_cast<int>(w.entries.size()) > window_) {
      for (int g : w.entries.front()) {
        auto it = w.reached_counts.find(g);
        if (--it->second == 0) w.reached_counts.erase(it);
      }
      w.entries.pop_front();
    }
  }
  for (int g : achieved) ++lifetime_counts_[g];
}

double GoalSampler::rarity(int goal_id) const {
  return 1.0 / static_cast<double>(std::max<int64_t>(1, lifetime_count(goal_id)));
}

int64_t GoalSampler::lifetime_count(int goal_id) const {
  auto it = lifetime_counts_.find(goal_id);
  return it == lifetime_counts_.end() ? 0 : it->second;
}

double GoalSampler::freq(int reached_goal, int targeted_goal) const {
  auto it = confusion_.find(targeted_goal);
  if (it == confusion_.end() || it->second.entries.empty()) return 0.0;
  auto rit = it->second.reached_counts.find(reached_goal);
  if (rit == it->second.reached_counts.end()) return 0.0;
  return static_cast<double>(rit->second) / static_cast<double>(it->second.entries.size());
}

double GoalSampler::raw_value(const Window& w) const {
  if (w.entries.empty()) return 0.0;
  double total = 0.0;
  for (const auto& [reached, count] : w.reached_counts)
    total += (static_cast<double>(count) / static_cast<double>(w.entries.size())) * rarity(reached);
  return total;
}

double GoalSampler::value(int goal_id, int n_goals) const {
  auto it = confusion_.find(goal_id);
  if (it != confusion_.end()) return raw_value(it->second);
  // optimistic initialization for never-targeted goals
  double best = 0.0;
  for (int g = 0; g < n_goals; ++g) {
    auto jt = confusion_.find(g);
    if (jt != confusion_.end()) best = std::max(best, raw_value(jt->second));
  }
  return best;
}

SelectionDistribution GoalSampler::selection_probabilities(int n_goals) const {
  if (n_goals < 1) throw std::invalid_argument("selection_probabilities: need at least one goal");
  SelectionDistribution d;
  d.values.resize(n_goals);
  d.probabilities.resize(n_goals);
  double total = 0.0;
  for (int g = 0; g < n_goals; ++g) {
    d.values[g] = value(g, n_goals);
    total += d.values[g];
  }
  const double n = static_cast<double>(n_goals);
  for (int g = 0; g < n_goals; ++g) {
    double match = total > 0.0 ? d.values[g] / total : 1.0 / n;
    d.probabilities[g] = epsilon_target_ / n + (1.0 - epsilon_target_) * match;
  }
  return d;
}

TargetChoice GoalSampler::sample_target(std::span<const GoalRecord> goals, int noise_dim,
                                        RngStream& rng) const {
  TargetChoice choice;
  const int n = static_cast<int>(goals.size());
  if (n == 0) {
    choice.encoding.resize(static_cast<std::size_t>(noise_dim));
    for (double& v : choice.encoding) v = rng.uniform(-1.0, 1.0);
    return choice;
  }
  SelectionDistribution d = selection_probabilities(n);
  double u = rng.uniform();
  double acc = 0.0;
  int picked = n - 1;
  for (int g = 0; g < n; ++g) {
    acc += d.probabilities[g];
    if (u < acc) {
      picked = g;
      break;
    }
  }
  choice.goal_id = picked;
  choice.encoding = goals[picked].encoding;
  return choice;
}

std::string GoalSampler::to_json_string() const {
  nlohmann::json j;
  j["epsilon_target"] = epsilon_target_;
  j["window"] = window_;
  nlohmann::json counts = nlohmann::json::array();
  for (const auto& [g, c] : lifetime_counts_) counts.push_back({g, c});
  j["lifetime_counts"] = counts;
  nlohmann::json conf = nlohmann::json::object();
  for (const auto& [target, w] : confusion_) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& achieved : w.entries) entries.push_back(achieved);
    conf[std::to_string(target)] = entries;
  }
  j["confusion"] = conf;
  return j.dump();
}

GoalSampler GoalSampler::from_json_string(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  GoalSampler s(j.at("epsilon_target").get<double>(), j.at("window").get<int>());
  for (const auto& pair : j.at("lifetime_counts"))
    s.lifetime_counts_[pair.at(0).get<int>()] = pair.at(1).get<int64_t>();
  for (const auto& [key, entries] : j.at("confusion").items()) {
    Window& w = s.confusion_[std::stoi(key)];
    for (const auto& achieved : entries) {
      w.entries.push_back(achieved.get<std::vector<int>>());
      for (int g : w.entries.back()) ++w.reached_counts[g];
    }
  }
  return s;
}

void GoalSampler::add_lifetime_counts(const std::map<int, int64_t>& delta) {
  for (const auto& [g, c] : delta) lifetime_counts_[g] += c;
}

}  // namespace le2
