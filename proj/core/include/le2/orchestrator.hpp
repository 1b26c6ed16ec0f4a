#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "le2/checkpoint.hpp"
#include "le2/config.hpp"
#include "le2/env.hpp"
#include "le2/goal_sampler.hpp"
#include "le2/language.hpp"
#include "le2/memory.hpp"
#include "le2/metrics.hpp"
#include "le2/policy_learner.hpp"
#include "le2/reward_model.hpp"
#include "le2/social_partner.hpp"

namespace le2 {

struct EvalPoint {
  int64_t episode = 0;
  double mean_success = 0.0;                // over the full catalog
  std::map<int, double> per_goal_success;   // catalog goal id -> rate
  std::optional<double> macro_f1;           // latest reward-model macro F1
  int discovered_goals = 0;
};

struct TrainHooks {
  // Called after each offline evaluation; return true to stop the run early.
  std::function<bool(const EvalPoint&)> on_eval;
};

struct TrainReport {
  int64_t episodes_run = 0;  // per worker
  int discovered_goals = 0;
  std::optional<double> final_mean_success;
  bool stopped_early = false;
  std::filesystem::path run_dir;
  std::filesystem::path checkpoint_path;
};

struct EvalTable {
  std::map<int, double> per_goal;  // catalog goal id -> success rate
  double mean_success = 0.0;
  int episodes_per_goal = 0;
};

// Runs the full training loop: target sampling, rollouts, SP descriptions,
// goal discovery, memory and reward-model ingestion, hindsight-augmented
// actor-critic updates, periodic reward-model refits, self-evaluations and
// offline oracle evaluations, worker-delta merging, metrics, checkpoints.
class Trainer {
 public:
  explicit Trainer(RunConfig cfg);
  static std::unique_ptr<Trainer> resume(const std::filesystem::path& checkpoint,
                                         std::optional<int64_t> total_episodes = std::nullopt,
                                         std::optional<std::string> output_dir = std::nullopt);
  ~Trainer();

  TrainReport train(const TrainHooks& hooks = {});

  const RunConfig& config() const { return cfg_; }
  const GoalRegistry& registry() const { return *registry_; }
  const RewardModel& reward_model() const { return *reward_model_; }
  int64_t episodes_completed() const { return episode_; }

  std::filesystem::path write_checkpoint(const std::string& tag) const;

 private:
  struct Worker;

  void init_shared();
  void init_workers();
  void restore_from(const BlobReader& reader);
  void run_episode_phase(Worker& w, int64_t episode);
  void barrier_merge();
  void refit_reward_model(int64_t episode);
  void self_evaluate(int64_t episode);
  EvalPoint offline_evaluate(int64_t episode);
  void emit_sampler_metrics(int64_t episode);
  uint64_t achieved_mask(Worker& w, const TransitionSample& tr,
                         const std::vector<GoalRecord>& goals);

  RunConfig cfg_;
  std::filesystem::path run_dir_;

  std::unique_ptr<GoalEncoder> encoder_;
  std::unique_ptr<SocialPartner> sp_;
  std::unique_ptr<GoalRegistry> registry_;
  std::unique_ptr<RewardModel> reward_model_;
  std::unique_ptr<LpTracker> lp_;
  std::unique_ptr<MetricsWriter> metrics_;
  std::vector<std::vector<double>> catalog_encodings_;
  std::vector<int> reg_to_catalog_;
  std::mutex registry_mutex_;

  std::vector<std::unique_ptr<Worker>> workers_;
  std::vector<double> shared_params_;

  int64_t episode_ = 0;  // per-worker episodes completed
  int64_t fit_index_ = 0;
  int64_t last_fit_episode_ = -1;
  uint64_t model_version_ = 0;
  std::optional<double> latest_macro_f1_;
};

TrainReport train_run(RunConfig cfg, const TrainHooks& hooks = {});

EvalTable evaluate_checkpoint(const std::filesystem::path& checkpoint, int episodes_per_goal);

// Derives the plot-ready CSV bundle (success_rate.csv, f1.csv,
// goal_selection_probabilities.csv, confusion_matrix.csv, per_goal_timeline.csv)
// from a run directory's metrics stream into <run_dir>/export/.
void export_run(const std::filesystem::path& run_dir);

}  // namespace le2
