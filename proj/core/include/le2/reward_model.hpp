#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "le2/language.hpp"
#include "le2/random_forest.hpp"
#include "le2/rng.hpp"
#include "le2/types.hpp"

namespace le2 {

// One labeled SP outcome: the final observation and episode delta, labeled for
// one goal. The classifier input is [final_obs, delta_obs, goal_encoding]
// (34 + D features); the encoding is looked up from the registry when features
// are assembled.
struct RewardExample {
  Obs final_obs{};
  Obs delta_obs{};
  int goal_id = 0;
  int label = 0;
  int64_t episode_id = 0;
};

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;  // 2PR/(P+R), 0/0 -> 0
  int64_t support_pos = 0;
  int64_t support_total = 0;
};

struct MetricsReport {
  std::map<int, PrecisionRecall> per_goal;
  PrecisionRecall macro;   // unweighted mean over goals present in the held-out set
  PrecisionRecall pooled;  // computed over all examples at once
  bool degenerate_model = false;
};

struct TrainRow {
  std::vector<double> features;
  int label = 0;
};

struct RewardModelConfig {
  int64_t refit_cadence = 600;  // episodes between refits (per worker)
  int per_goal_cap = 1000;
  double min_positive_fraction = 0.2;
  ForestHyperparams forest;
};

// The learned internal reward function R(s, delta_s, g) -> {0, 1}: a
// goal-conditioned binary classifier trained from SP feedback, with
// imbalance-aware training-set construction (per-goal caps, a minimum positive
// fraction via oversampling) and per-goal quality monitoring.
class RewardModel {
 public:
  RewardModel(RewardModelConfig cfg, const GoalEncoder* encoder) : cfg_(cfg), encoder_(encoder) {}

  // Positives for achieved goals, negatives for discovered-but-missed ones.
  // Throws if achieved is not a subset of discovered.
  std::vector<RewardExample> ingest_episode(const Obs& initial_obs, const Obs& final_obs,
                                            const std::vector<int>& achieved,
                                            const std::vector<int>& discovered,
                                            int64_t episode_id);

  std::vector<TrainRow> build_training_set(int per_goal_cap, double min_positive_fraction,
                                           const GoalRegistry& registry, RngStream& rng,
                                           int64_t max_episode_id) const;

  // Fits the forest on the given rows. Single-class sets produce a degenerate
  // constant model (flagged in reports), not an error.
  void fit(const std::vector<TrainRow>& training_set, uint64_t seed);

  int predict(const Obs& final_obs, const Obs& delta_obs,
              std::span<const double> goal_encoding) const;

  MetricsReport evaluate_recent(std::span<const RewardExample> heldout,
                                const GoalRegistry& registry) const;

  bool fitted() const { return forest_.fitted(); }
  const RandomForest& forest() const { return forest_; }
  void set_forest(RandomForest f) { forest_ = std::move(f); }
  const RewardModelConfig& config() const { return cfg_; }

  const std::vector<RewardExample>& store() const { return store_; }
  void restore_store(std::vector<RewardExample> store) { store_ = std::move(store); }
  std::vector<RewardExample> examples_since(int64_t episode_exclusive) const;

  // Number of predict() calls since construction; lets tests assert the model
  // is never consulted in true-reward mode.
  int64_t predict_count() const { return predict_count_.load(std::memory_order_relaxed); }

  int feature_dim() const { return 2 * kObsDim + encoder_->dim(); }
  static void assemble_features(const Obs& final_obs, const Obs& delta_obs,
                                std::span<const double> goal_encoding, std::vector<double>& out);

 private:
  RewardModelConfig cfg_;
  const GoalEncoder* encoder_;
  std::vector<RewardExample> store_;
  RandomForest forest_;
  mutable std::atomic<int64_t> predict_count_{0};
};

}  // namespace le2
