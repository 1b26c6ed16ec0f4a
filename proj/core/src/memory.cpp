#include "le2/memory.hpp"

#include <fstream>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

namespace le2 {

ReplayMemory::ReplayMemory(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw std::invalid_argument("ReplayMemory: capacity must be positive");
}

void ReplayMemory::store_episode(EpisodeRecord record) {
  if (record.observations.size() != record.actions.size() + 1)
    throw std::invalid_argument("store_episode: need T+1 observations for T actions");
  if (record.actions.empty()) throw std::invalid_argument("store_episode: empty episode");
  if (insertion_index_.count(record.episode_id))
    throw std::invalid_argument("store_episode: duplicate episode id");

  for (int g : record.achieved_goal_ids) {
    buffers_[g].push_back(record.episode_id);
    ++lifetime_counts_[g];
  }
  insertion_index_.emplace(record.episode_id, stored_++);
  episodes_.push_back(std::move(record));

  while (episodes_.size() > capacity_) {
    const EpisodeRecord& victim = episodes_.front();
    for (int g : victim.achieved_goal_ids) {
      auto it = buffers_.find(g);
      it->second.pop_front();  // FIFO: the evicted episode is the oldest everywhere
      if (it->second.empty()) buffers_.erase(it);
    }
    insertion_index_.erase(victim.episode_id);
    episodes_.pop_front();
    ++evicted_;
  }
}

const EpisodeRecord& ReplayMemory::episode_by_id(int64_t id) const {
  std::size_t pos = insertion_index_.at(id) - evicted_;
  return episodes_[pos];
}

std::vector<TransitionSample> ReplayMemory::sample_transitions(int n, RngStream& rng) const {
  if (episodes_.empty()) throw std::runtime_error("sample_transitions: memory is empty");
  std::vector<TransitionSample> out;
  out.reserve(static_cast<std::size_t>(n > 0 ? n : 0));

  std::vector<int> goal_keys;
  goal_keys.reserve(buffers_.size());
  for (const auto& [g, _] : buffers_) goal_keys.push_back(g);
  const int n_choices = static_cast<int>(goal_keys.size()) + 1;  // + the main buffer

  for (int i = 0; i < n; ++i) {
    int choice = rng.uniform_int(n_choices);
    TransitionSample s;
    const EpisodeRecord* ep = nullptr;
    if (choice < static_cast<int>(goal_keys.size())) {
      const std::deque<int64_t>& buf = buffers_.at(goal_keys[choice]);
      ep = &episode_by_id(buf[rng.uniform_int(static_cast<int>(buf.size()))]);
      s.source_goal_buffer = goal_keys[choice];
    } else {
      ep = &episodes_[rng.uniform_int(static_cast<int>(episodes_.size()))];
      s.source_goal_buffer = -1;
    }
    const int T = static_cast<int>(ep->actions.size());
    int t = rng.uniform_int(T);
    s.obs_t = ep->observations[t];
    s.obs_0 = ep->observations[0];
    s.action = ep->actions[t];
    s.obs_next = ep->observations[t + 1];
    s.source_episode = ep->episode_id;
    s.t = t;
    s.done = (t == T - 1);
    out.push_back(s);
  }
  return out;
}

void ReplayMemory::set_lifetime_counts(std::map<int, int64_t> counts) {
  lifetime_counts_ = std::move(counts);
}

namespace {

nlohmann::json episode_to_json(const EpisodeRecord& e) {
  nlohmann::json obs = nlohmann::json::array();
  for (const Obs& o : e.observations) obs.push_back(o);
  nlohmann::json acts = nlohmann::json::array();
  for (const Action& a : e.actions) acts.push_back(a);
  nlohmann::json j{{"episode_id", e.episode_id}, {"observations", obs}, {"actions", acts}};
  j["achieved_goal_ids"] = e.achieved_goal_ids;
  if (e.targeted_goal) j["targeted_goal"] = *e.targeted_goal;
  return j;
}

}  // namespace

void append_trajectory(std::ostream& out, const EpisodeRecord& episode) {
  out << episode_to_json(episode).dump() << '\n';
}

void write_trajectories(const std::filesystem::path& path,
                        std::span<const EpisodeRecord> episodes) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_trajectories: cannot open " + path.string());
  for (const EpisodeRecord& e : episodes) append_trajectory(out, e);
}

std::vector<EpisodeRecord> read_trajectories(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_trajectories: cannot open " + path.string());
  std::vector<EpisodeRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    EpisodeRecord e;
    e.episode_id = j.at("episode_id").get<int64_t>();
    for (const auto& o : j.at("observations")) e.observations.push_back(o.get<Obs>());
    for (const auto& a : j.at("actions")) e.actions.push_back(a.get<Action>());
    if (j.contains("achieved_goal_ids"))
      e.achieved_goal_ids = j.at("achieved_goal_ids").get<std::vector<int>>();
    if (j.contains("targeted_goal")) e.targeted_goal = j.at("targeted_goal").get<int>();
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace le2
