#include "le2/reward_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace le2 {
namespace {

PrecisionRecall prf(int64_t tp, int64_t fp, int64_t fn, int64_t total) {
  PrecisionRecall m;
  m.precision = (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  m.recall = (tp + fn) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  m.f1 = (m.precision + m.recall) > 0.0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  m.support_pos = tp + fn;
  m.support_total = total;
  return m;
}

}  // namespace

void RewardModel::assemble_features(const Obs& final_obs, const Obs& delta_obs,
                                    std::span<const double> goal_encoding,
                                    std::vector<double>& out) {
  out.clear();
  out.reserve(2 * kObsDim + goal_encoding.size());
  out.insert(out.end(), final_obs.begin(), final_obs.end());
  out.insert(out.end(), delta_obs.begin(), delta_obs.end());
  out.insert(out.end(), goal_encoding.begin(), goal_encoding.end());
}

std::vector<RewardExample> RewardModel::ingest_episode(const Obs& initial_obs,
                                                       const Obs& final_obs,
                                                       const std::vector<int>& achieved,
                                                       const std::vector<int>& discovered,
                                                       int64_t episode_id) {
  std::set<int> discovered_set(discovered.begin(), discovered.end());
  for (int g : achieved)
    if (!discovered_set.count(g))
      throw std::invalid_argument(
          "ingest_episode: achieved goal " + std::to_string(g) +
          " is not registered as discovered (registration must precede ingest)");

  Obs delta;
  for (int i = 0; i < kObsDim; ++i) delta[i] = final_obs[i] - initial_obs[i];

  std::set<int> achieved_set(achieved.begin(), achieved.end());
  std::vector<RewardExample> emitted;
  emitted.reserve(discovered_set.size());
  for (int g : discovered_set) {
    RewardExample ex;
    ex.final_obs = final_obs;
    ex.delta_obs = delta;
    ex.goal_id = g;
    ex.label = achieved_set.count(g) ? 1 : 0;
    ex.episode_id = episode_id;
    emitted.push_back(ex);
  }
  store_.insert(store_.end(), emitted.begin(), emitted.end());
  return emitted;
}

std::vector<TrainRow> RewardModel::build_training_set(int per_goal_cap,
                                                      double min_positive_fraction,
                                                      const GoalRegistry& registry,
                                                      RngStream& rng,
                                                      int64_t max_episode_id) const {
  if (per_goal_cap <= 0) throw std::invalid_argument("build_training_set: cap must be positive");
  if (min_positive_fraction < 0.0 || min_positive_fraction >= 1.0)
    throw std::invalid_argument("build_training_set: floor must be in [0, 1)");

  // group store indices by goal, oldest first
  std::map<int, std::pair<std::vector<int>, std::vector<int>>> by_goal;  // goal -> (pos, neg)
  for (int i = 0; i < static_cast<int>(store_.size()); ++i) {
    const RewardExample& ex = store_[i];
    if (ex.episode_id > max_episode_id) continue;
    auto& bucket = by_goal[ex.goal_id];
    (ex.label ? bucket.first : bucket.second).push_back(i);
  }

  auto subsample = [&rng](const std::vector<int>& pool, int take) {
    // partial Fisher-Yates over a copy; take <= pool.size()
    std::vector<int> picked(pool);
    for (int j = 0; j < take; ++j) {
      int swap_with = j + rng.uniform_int(static_cast<int>(picked.size()) - j);
      std::swap(picked[j], picked[swap_with]);
    }
    picked.resize(take);
    return picked;
  };

  std::vector<TrainRow> rows;
  std::vector<double> features;
  auto emit = [&](int store_index) {
    const RewardExample& ex = store_[store_index];
    assemble_features(ex.final_obs, ex.delta_obs, registry.record(ex.goal_id).encoding, features);
    rows.push_back(TrainRow{features, ex.label});
  };

  for (const auto& [goal, bucket] : by_goal) {
    const std::vector<int>& pos_pool = bucket.first;
    const std::vector<int>& neg_pool = bucket.second;
    const int n_pos = static_cast<int>(pos_pool.size());
    const int n_neg = static_cast<int>(neg_pool.size());

    if (n_pos == 0) {
      for (int i : subsample(neg_pool, std::min(n_neg, per_goal_cap))) emit(i);
      continue;  // the floor is never met by fabricating labels
    }
    if (n_neg == 0) {
      for (int i : subsample(pos_pool, std::min(n_pos, per_goal_cap))) emit(i);
      continue;
    }

    const int budget = std::min(per_goal_cap, n_pos + n_neg);
    int neg_take = std::min(n_neg, static_cast<int>(std::floor((1.0 - min_positive_fraction) *
                                                               static_cast<double>(budget))));
    int pos_take = budget - neg_take;
    for (int i : subsample(neg_pool, neg_take)) emit(i);
    if (pos_take <= n_pos) {
      for (int i : subsample(pos_pool, pos_take)) emit(i);
    } else {
      // oversample with replacement: whole tiles first, then a random remainder
      int tiles = pos_take / n_pos;
      int rem = pos_take % n_pos;
      for (int t = 0; t < tiles; ++t)
        for (int i : pos_pool) emit(i);
      for (int i : subsample(pos_pool, rem)) emit(i);
    }
  }
  return rows;
}

void RewardModel::fit(const std::vector<TrainRow>& training_set, uint64_t seed) {
  if (training_set.empty()) throw std::invalid_argument("RewardModel::fit: empty training set");
  const int dim = static_cast<int>(training_set.front().features.size());
  std::vector<double> X;
  X.reserve(training_set.size() * static_cast<std::size_t>(dim));
  std::vector<int> y;
  y.reserve(training_set.size());
  for (const TrainRow& row : training_set) {
    if (static_cast<int>(row.features.size()) != dim)
      throw std::invalid_argument("RewardModel::fit: inconsistent feature dimensions");
    X.insert(X.end(), row.features.begin(), row.features.end());
    y.push_back(row.label);
  }
  forest_ = RandomForest::fit(X, y, dim, cfg_.forest, seed);
}

int RewardModel::predict(const Obs& final_obs, const Obs& delta_obs,
                         std::span<const double> goal_encoding) const {
  if (!forest_.fitted()) throw std::logic_error("RewardModel::predict: model not fitted");
  predict_count_.fetch_add(1, std::memory_order_relaxed);
  thread_local std::vector<double> features;
  assemble_features(final_obs, delta_obs, goal_encoding, features);
  return forest_.predict(features);
}

MetricsReport RewardModel::evaluate_recent(std::span<const RewardExample> heldout,
                                           const GoalRegistry& registry) const {
  MetricsReport report;
  report.degenerate_model = forest_.degenerate();
  std::map<int, std::array<int64_t, 4>> counts;  // goal -> tp, fp, fn, total
  for (const RewardExample& ex : heldout) {
    int pred = predict(ex.final_obs, ex.delta_obs, registry.record(ex.goal_id).encoding);
    auto& c = counts[ex.goal_id];
    c[0] += (pred == 1 && ex.label == 1);
    c[1] += (pred == 1 && ex.label == 0);
    c[2] += (pred == 0 && ex.label == 1);
    c[3] += 1;
  }
  int64_t tp = 0, fp = 0, fn = 0, total = 0;
  double psum = 0, rsum = 0, fsum = 0;
  for (const auto& [goal, c] : counts) {
    PrecisionRecall m = prf(c[0], c[1], c[2], c[3]);
    report.per_goal[goal] = m;
    psum += m.precision;
    rsum += m.recall;
    fsum += m.f1;
    tp += c[0];
    fp += c[1];
    fn += c[2];
    total += c[3];
  }
  if (!counts.empty()) {
    const double n = static_cast<double>(counts.size());
    report.macro.precision = psum / n;
    report.macro.recall = rsum / n;
    report.macro.f1 = fsum / n;
    report.macro.support_total = total;
  }
  report.pooled = prf(tp, fp, fn, total);
  return report;
}

std::vector<RewardExample> RewardModel::examples_since(int64_t episode_exclusive) const {
  std::vector<RewardExample> out;
  for (const RewardExample& ex : store_)
    if (ex.episode_id > episode_exclusive) out.push_back(ex);
  return out;
}

}  // namespace le2
