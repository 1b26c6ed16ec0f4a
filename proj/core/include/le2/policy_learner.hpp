#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "le2/language.hpp"
#include "le2/memory.hpp"
#include "le2/mlp.hpp"
#include "le2/rng.hpp"
#include "le2/types.hpp"

namespace le2 {

struct LearnerConfig {
  int goal_dim = 50;
  int hidden = 256;
  double gamma = 0.98;  // 1 - 1/T for T = 50
  double tau = 0.95;    // target <- tau*target + (1-tau)*main
  double actor_lr = 1e-3;
  double critic_lr = 1e-3;
  double noise_scale = 0.2;
  double epsilon_random = 0.3;
  double action_l2 = 1.0;
  int batch_size = 256;
  double rho_positive = 0.5;   // target share of positive-reward substitutions
  double epsilon_replay = 0.2; // floor for ALP probability matching
  int update_cycles = 2;
  int updates_per_cycle = 40;
  int self_eval_rollouts = 1;
  int lp_window = 5;

  int state_dim() const { return 2 * kObsDim + goal_dim; }
};

// Per-goal competence and absolute learning progress, fed by noiseless
// self-evaluation rollouts. ALP(g) = |mean(recent window) - mean(previous
// window)| of the competence history.
class LpTracker {
 public:
  explicit LpTracker(int window) : window_(window) {}

  void record(int goal_id, double success_rate);
  double competence(int goal_id) const;
  double alp(int goal_id) const;
  int window() const { return window_; }
  const std::map<int, std::vector<double>>& histories() const { return history_; }
  void restore(std::map<int, std::vector<double>> histories) { history_ = std::move(histories); }

 private:
  int window_;
  std::map<int, std::vector<double>> history_;
};

struct AugmentedTransition {
  const TransitionSample* base = nullptr;
  int goal_id = 0;
  std::span<const double> goal_encoding;
  double reward = 0.0;
};

struct LossReport {
  double critic_loss = 0.0;
  double actor_loss = 0.0;
  double mean_q = 0.0;
  double positive_fraction = 0.0;
};

// Predicted-achieved set for a transition, as a bitmask over registry goal ids
// (bit g set = goal g judged achieved at obs_next). Kept as a callback so the
// orchestrator can memoize forest calls and tests can stub outcomes.
using AchievedMaskFn = std::function<uint64_t(const TransitionSample&)>;

// Goal-conditioned actor-critic with target networks. The actor maps
// [obs, obs - obs_0, goal] to a tanh action; the critic scores the same state
// with the action appended. Updates are DDPG style with Adam and Polyak target
// tracking; gradients are hand-backpropagated in Mlp.
class DdpgLearner {
 public:
  DdpgLearner(const LearnerConfig& cfg, RngStream& init_rng);

  const LearnerConfig& config() const { return cfg_; }

  Action act(const Obs& obs, const Obs& obs_0, std::span<const double> goal, double noise_scale,
             double epsilon_random, RngStream& rng) const;
  Action act_greedy(const Obs& obs, const Obs& obs_0, std::span<const double> goal) const;

  // Relabels each transition with a substituted goal: with probability rho_pos
  // (and a non-empty predicted-achieved set) an achieved goal drawn by ALP
  // probability matching with an epsilon floor; otherwise a uniformly drawn
  // non-achieved discovered goal. The attached reward bit is the substituted
  // goal's predicted outcome.
  std::vector<AugmentedTransition> hindsight_augment(std::span<const TransitionSample> batch,
                                                     const std::vector<GoalRecord>& goals,
                                                     const AchievedMaskFn& achieved_mask,
                                                     const LpTracker& lp, RngStream& rng) const;

  LossReport update(std::span<const AugmentedTransition> batch);

  void polyak(double tau);  // called by update(); public for the fixed-point tests

  // Main-network parameters (actor then critic) as one flat vector, for
  // worker-delta merging and checkpoints.
  std::vector<double> main_params() const;
  void set_main_params(std::span<const double> flat);

  Mlp& actor() { return actor_; }
  Mlp& critic() { return critic_; }
  Mlp& actor_target() { return actor_target_; }
  Mlp& critic_target() { return critic_target_; }
  AdamOptimizer& actor_opt() { return actor_opt_; }
  AdamOptimizer& critic_opt() { return critic_opt_; }

  // Loss+gradient entry points reused by the finite-difference tests so the
  // checked path is exactly the training path.
  double critic_loss_and_grad(const double* SA, const double* targets, int batch,
                              std::vector<double>& grads) const;
  double actor_loss_and_grad(const double* S, int batch, std::vector<double>& grads) const;

 private:
  void assemble_state(const Obs& obs, const Obs& obs_0, std::span<const double> goal,
                      double* out) const;

  LearnerConfig cfg_;
  Mlp actor_, critic_, actor_target_, critic_target_;
  AdamOptimizer actor_opt_, critic_opt_;
  mutable Mlp::BatchCache scratch_a_, scratch_c_;
};

// Elementwise sum of worker deltas applied to the shared parameters.
// merged = base + sum(deltas); every delta must match the base shape.
std::vector<double> merge_worker_updates(const std::vector<double>& base,
                                         const std::vector<std::vector<double>>& deltas);

// Probability-matching distribution with an epsilon floor over `weights`
// (uniform when all weights are zero). Shared by the ALP replay bias; exposed
// for the distribution tests.
std::vector<double> epsilon_matching(const std::vector<double>& weights, double epsilon);

}  // namespace le2
