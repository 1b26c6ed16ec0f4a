#include "le2/policy_learner.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

namespace le2 {

void LpTracker::record(int goal_id, double success_rate) {
  history_[goal_id].push_back(success_rate);
}

double LpTracker::competence(int goal_id) const {
  auto it = history_.find(goal_id);
  if (it == history_.end() || it->second.empty()) return 0.0;
  return it->second.back();
}

double LpTracker::alp(int goal_id) const {
  auto it = history_.find(goal_id);
  if (it == history_.end()) return 0.0;
  const std::vector<double>& h = it->second;
  const int n = static_cast<int>(h.size());
  if (n < 2) return 0.0;
  const int w = std::min(window_, n / 2);
  double recent = 0.0, previous = 0.0;
  for (int i = n - w; i < n; ++i) recent += h[i];
  for (int i = n - 2 * w; i < n - w; ++i) previous += h[i];
  return std::abs(recent - previous) / static_cast<double>(w);
}

DdpgLearner::DdpgLearner(const LearnerConfig& cfg, RngStream& init_rng)
    : cfg_(cfg),
      actor_(cfg.state_dim(), cfg.hidden, kActionDim, /*tanh_output=*/true),
      critic_(cfg.state_dim() + kActionDim, cfg.hidden, 1, /*tanh_output=*/false),
      actor_target_(cfg.state_dim(), cfg.hidden, kActionDim, true),
      critic_target_(cfg.state_dim() + kActionDim, cfg.hidden, 1, false),
      actor_opt_(actor_.param_count(), cfg.actor_lr),
      critic_opt_(critic_.param_count(), cfg.critic_lr) {
  actor_.init_params(init_rng, 1e-3);  // near-zero initial actions
  critic_.init_params(init_rng, 1.0);
  actor_target_.params() = actor_.params();
  critic_target_.params() = critic_.params();
}

void DdpgLearner::assemble_state(const Obs& obs, const Obs& obs_0, std::span<const double> goal,
                                 double* out) const {
  for (int i = 0; i < kObsDim; ++i) out[i] = obs[i];
  for (int i = 0; i < kObsDim; ++i) out[kObsDim + i] = obs[i] - obs_0[i];
  std::memcpy(out + 2 * kObsDim, goal.data(), sizeof(double) * goal.size());
}

Action DdpgLearner::act(const Obs& obs, const Obs& obs_0, std::span<const double> goal,
                        double noise_scale, double epsilon_random, RngStream& rng) const {
  if (epsilon_random > 0.0 && rng.uniform() < epsilon_random) {
    Action a;
    for (double& v : a) v = rng.uniform(-1.0, 1.0);
    return a;
  }
  Action a = act_greedy(obs, obs_0, goal);
  if (noise_scale > 0.0)
    for (double& v : a) v = clamp_unit(v + noise_scale * rng.gaussian());
  return a;
}

Action DdpgLearner::act_greedy(const Obs& obs, const Obs& obs_0,
                               std::span<const double> goal) const {
  std::vector<double> x(static_cast<std::size_t>(cfg_.state_dim()));
  assemble_state(obs, obs_0, goal, x.data());
  Action a{};
  actor_.forward(x, std::span<double>(a.data(), a.size()));
  return a;
}

std::vector<double> epsilon_matching(const std::vector<double>& weights, double epsilon) {
  const int n = static_cast<int>(weights.size());
  std::vector<double> p(weights.size());
  double total = 0.0;
  for (double w : weights) total += w;
  for (int i = 0; i < n; ++i) {
    double match = total > 0.0 ? weights[i] / total : 1.0 / n;
    p[i] = epsilon / n + (1.0 - epsilon) * match;
  }
  return p;
}

std::vector<AugmentedTransition> DdpgLearner::hindsight_augment(
    std::span<const TransitionSample> batch, const std::vector<GoalRecord>& goals,
    const AchievedMaskFn& achieved_mask, const LpTracker& lp, RngStream& rng) const {
  const int n_goals = static_cast<int>(goals.size());
  if (n_goals == 0) throw std::logic_error("hindsight_augment: no discovered goals");
  if (n_goals > 64) throw std::logic_error("hindsight_augment: >64 goals unsupported");

  std::vector<AugmentedTransition> out;
  out.reserve(batch.size());
  std::vector<int> achieved, missed;
  std::vector<double> alp_weights;

  for (const TransitionSample& tr : batch) {
    const uint64_t mask = achieved_mask(tr);
    achieved.clear();
    missed.clear();
    for (int g = 0; g < n_goals; ++g)
      (mask >> g & 1ULL ? achieved : missed).push_back(g);

    bool want_positive = !achieved.empty() && rng.uniform() < cfg_.rho_positive;
    if (!want_positive && missed.empty()) want_positive = !achieved.empty();

    AugmentedTransition aug;
    aug.base = &tr;
    if (want_positive) {
      alp_weights.resize(achieved.size());
      for (std::size_t i = 0; i < achieved.size(); ++i) alp_weights[i] = lp.alp(achieved[i]);
      std::vector<double> p = epsilon_matching(alp_weights, cfg_.epsilon_replay);
      double u = rng.uniform(), acc = 0.0;
      int pick = static_cast<int>(achieved.size()) - 1;
      for (std::size_t i = 0; i < p.size(); ++i) {
        acc += p[i];
        if (u < acc) {
          pick = static_cast<int>(i);
          break;
        }
      }
      aug.goal_id = achieved[pick];
      aug.reward = 1.0;
    } else {
      aug.goal_id = missed[rng.uniform_int(static_cast<int>(missed.size()))];
      aug.reward = 0.0;
    }
    aug.goal_encoding = goals[aug.goal_id].encoding;
    out.push_back(aug);
  }
  return out;
}

double DdpgLearner::critic_loss_and_grad(const double* SA, const double* targets, int batch,
                                         std::vector<double>& grads) const {
  critic_.forward_batch(SA, batch, scratch_c_);
  double loss = 0.0;
  std::vector<double> dy(static_cast<std::size_t>(batch));
  for (int b = 0; b < batch; ++b) {
    double err = scratch_c_.y[b] - targets[b];
    loss += err * err;
    dy[b] = 2.0 * err / static_cast<double>(batch);
  }
  loss /= static_cast<double>(batch);
  grads.assign(static_cast<std::size_t>(critic_.param_count()), 0.0);
  critic_.backward_batch(SA, dy.data(), scratch_c_, grads.data());
  return loss;
}

double DdpgLearner::actor_loss_and_grad(const double* S, int batch, std::vector<double>& grads) const {
  const int sdim = cfg_.state_dim();
  const int cdim = sdim + kActionDim;

  actor_.forward_batch(S, batch, scratch_a_);

  // interleave [s, pi(s)] for the critic
  std::vector<double> SA(static_cast<std::size_t>(batch) * cdim);
  for (int b = 0; b < batch; ++b) {
    std::memcpy(&SA[static_cast<std::size_t>(b) * cdim], S + static_cast<std::size_t>(b) * sdim,
                sizeof(double) * sdim);
    std::memcpy(&SA[static_cast<std::size_t>(b) * cdim + sdim],
                &scratch_a_.y[static_cast<std::size_t>(b) * kActionDim],
                sizeof(double) * kActionDim);
  }

  Mlp::BatchCache critic_cache;
  critic_.forward_batch(SA.data(), batch, critic_cache);

  double q_mean = 0.0, penalty = 0.0;
  for (int b = 0; b < batch; ++b) q_mean += critic_cache.y[b];
  q_mean /= static_cast<double>(batch);
  for (std::size_t i = 0; i < static_cast<std::size_t>(batch) * kActionDim; ++i)
    penalty += scratch_a_.y[i] * scratch_a_.y[i];
  penalty /= static_cast<double>(batch) * kActionDim;
  const double loss = -q_mean + cfg_.action_l2 * penalty;

  // dL/dq = -1/B; backprop through the critic to its inputs (critic params frozen)
  std::vector<double> dq(static_cast<std::size_t>(batch), -1.0 / static_cast<double>(batch));
  std::vector<double> critic_param_sink(static_cast<std::size_t>(critic_.param_count()), 0.0);
  std::vector<double> dSA(static_cast<std::size_t>(batch) * cdim);
  critic_.backward_batch(SA.data(), dq.data(), critic_cache, critic_param_sink.data(), dSA.data());

  // action slice plus l2 penalty term
  std::vector<double> dA(static_cast<std::size_t>(batch) * kActionDim);
  const double pen_coeff = 2.0 * cfg_.action_l2 / (static_cast<double>(batch) * kActionDim);
  for (int b = 0; b < batch; ++b)
    for (int k = 0; k < kActionDim; ++k)
      dA[static_cast<std::size_t>(b) * kActionDim + k] =
          dSA[static_cast<std::size_t>(b) * cdim + sdim + k] +
          pen_coeff * scratch_a_.y[static_cast<std::size_t>(b) * kActionDim + k];

  grads.assign(static_cast<std::size_t>(actor_.param_count()), 0.0);
  actor_.backward_batch(S, dA.data(), scratch_a_, grads.data());
  return loss;
}

LossReport DdpgLearner::update(std::span<const AugmentedTransition> batch) {
  if (batch.empty()) throw std::invalid_argument("update: empty batch");
  const int B = static_cast<int>(batch.size());
  const int sdim = cfg_.state_dim();
  const int cdim = sdim + kActionDim;

  std::vector<double> S(static_cast<std::size_t>(B) * sdim);
  std::vector<double> S2(static_cast<std::size_t>(B) * sdim);
  std::vector<double> SA(static_cast<std::size_t>(B) * cdim);
  double positive = 0.0;
  for (int b = 0; b < B; ++b) {
    const AugmentedTransition& tr = batch[b];
    assemble_state(tr.base->obs_t, tr.base->obs_0, tr.goal_encoding,
                   &S[static_cast<std::size_t>(b) * sdim]);
    assemble_state(tr.base->obs_next, tr.base->obs_0, tr.goal_encoding,
                   &S2[static_cast<std::size_t>(b) * sdim]);
    std::memcpy(&SA[static_cast<std::size_t>(b) * cdim], &S[static_cast<std::size_t>(b) * sdim],
                sizeof(double) * sdim);
    for (int k = 0; k < kActionDim; ++k)
      SA[static_cast<std::size_t>(b) * cdim + sdim + k] = clamp_unit(tr.base->action[k]);
    positive += tr.reward > 0.5 ? 1.0 : 0.0;
  }

  // y = r + gamma * (1 - done) * Q_target(s', pi_target(s'))
  Mlp::BatchCache tgt_a, tgt_c;
  actor_target_.forward_batch(S2.data(), B, tgt_a);
  std::vector<double> SA2(static_cast<std::size_t>(B) * cdim);
  for (int b = 0; b < B; ++b) {
    std::memcpy(&SA2[static_cast<std::size_t>(b) * cdim], &S2[static_cast<std::size_t>(b) * sdim],
                sizeof(double) * sdim);
    std::memcpy(&SA2[static_cast<std::size_t>(b) * cdim + sdim],
                &tgt_a.y[static_cast<std::size_t>(b) * kActionDim], sizeof(double) * kActionDim);
  }
  critic_target_.forward_batch(SA2.data(), B, tgt_c);
  std::vector<double> y(static_cast<std::size_t>(B));
  // {0,1} rewards bound the return to [0, 1/(1-gamma)]; clamping the
  // regression target to that range keeps bootstrap overshoot from compounding
  const double max_return = 1.0 / (1.0 - cfg_.gamma);
  for (int b = 0; b < B; ++b) {
    const AugmentedTransition& tr = batch[b];
    double target = tr.reward + (tr.base->done ? 0.0 : cfg_.gamma * tgt_c.y[b]);
    y[b] = std::clamp(target, 0.0, max_return);
  }

  std::vector<double> grads;
  LossReport report;
  report.critic_loss = critic_loss_and_grad(SA.data(), y.data(), B, grads);
  critic_opt_.step(critic_.params(), grads);

  report.actor_loss = actor_loss_and_grad(S.data(), B, grads);
  actor_opt_.step(actor_.params(), grads);

  double q_mean = 0.0;
  for (int b = 0; b < B; ++b) q_mean += scratch_c_.y[b];
  report.mean_q = q_mean / B;
  report.positive_fraction = positive / B;

  if (!std::isfinite(report.critic_loss) || !std::isfinite(report.actor_loss))
    throw RuntimeAbort("policy update diverged: critic_loss=" + std::to_string(report.critic_loss) +
                       " actor_loss=" + std::to_string(report.actor_loss));

  polyak(cfg_.tau);
  return report;
}

void DdpgLearner::polyak(double tau) {
  auto blend = [tau](std::vector<double>& target, const std::vector<double>& main) {
    for (std::size_t i = 0; i < target.size(); ++i)
      target[i] = tau * target[i] + (1.0 - tau) * main[i];
  };
  blend(actor_target_.params(), actor_.params());
  blend(critic_target_.params(), critic_.params());
}

std::vector<double> DdpgLearner::main_params() const {
  std::vector<double> flat;
  flat.reserve(actor_.params().size() + critic_.params().size());
  flat.insert(flat.end(), actor_.params().begin(), actor_.params().end());
  flat.insert(flat.end(), critic_.params().begin(), critic_.params().end());
  return flat;
}

void DdpgLearner::set_main_params(std::span<const double> flat) {
  if (flat.size() != actor_.params().size() + critic_.params().size())
    throw std::invalid_argument("set_main_params: size mismatch");
  std::copy(flat.begin(), flat.begin() + actor_.params().size(), actor_.params().begin());
  std::copy(flat.begin() + actor_.params().size(), flat.end(), critic_.params().begin());
}

std::vector<double> merge_worker_updates(const std::vector<double>& base,
                                         const std::vector<std::vector<double>>& deltas) {
  std::vector<double> total(base.size(), 0.0);
  for (const std::vector<double>& d : deltas) {
    if (d.size() != base.size())
      throw std::invalid_argument("merge_worker_updates: delta shape mismatch");
    for (std::size_t i = 0; i < total.size(); ++i) total[i] += d[i];
  }
  std::vector<double> merged(base.size());
  for (std::size_t i = 0; i < merged.size(); ++i) merged[i] = base[i] + total[i];
  return merged;
}

}  // namespace le2
