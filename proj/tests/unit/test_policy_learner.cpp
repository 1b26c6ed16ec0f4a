#include <cmath>
#include <map>

#include "doctest.h"
#include "le2/policy_learner.hpp"
#include "le2/rng.hpp"

using namespace le2;

namespace {

LearnerConfig small_config() {
  LearnerConfig cfg;
  cfg.goal_dim = 6;
  cfg.hidden = 8;
  cfg.batch_size = 4;
  return cfg;
}

std::vector<GoalRecord> make_goals(int n, int dim, RngStream& rng) {
  std::vector<GoalRecord> goals(n);
  for (int g = 0; g < n; ++g) {
    goals[g].goal_id = g;
    goals[g].encoding.resize(dim);
    for (double& v : goals[g].encoding) v = rng.uniform(-1, 1);
  }
  return goals;
}

TransitionSample random_transition(RngStream& rng) {
  TransitionSample tr;
  for (int i = 0; i < kObsDim; ++i) {
    tr.obs_t[i] = rng.uniform(-1, 1);
    tr.obs_0[i] = rng.uniform(-1, 1);
    tr.obs_next[i] = rng.uniform(-1, 1);
  }
  for (int k = 0; k < kActionDim; ++k) tr.action[k] = rng.uniform(-1, 1);
  tr.t = rng.uniform_int(49);
  tr.done = false;
  return tr;
}

double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({1e-4, std::abs(a), std::abs(b)});
}

}  // namespace

TEST_SUITE("policy_learner") {
  TEST_CASE("actions stay in bounds under noise and saturation") {
    RngStream init(1), rng(2);
    LearnerConfig cfg = small_config();
    DdpgLearner learner(cfg, init);
    for (double& p : learner.actor().params()) p *= 40.0;
    Obs obs{}, obs0{};
    std::vector<double> goal(cfg.goal_dim, 0.5);
    for (int i = 0; i < 500; ++i) {
      Action a = learner.act(obs, obs0, goal, 1.5, 0.3, rng);
      for (double v : a) {
        CHECK(v >= -1.0);
        CHECK(v <= 1.0);
      }
    }
  }

  TEST_CASE("act is deterministic without noise; zero final layer acts zero") {
    RngStream init(3), rng(4);
    LearnerConfig cfg = small_config();
    DdpgLearner learner(cfg, init);
    Obs obs{}, obs0{};
    obs[0] = 0.4;
    std::vector<double> goal(cfg.goal_dim, -0.3);
    Action a1 = learner.act(obs, obs0, goal, 0.0, 0.0, rng);
    Action a2 = learner.act(obs, obs0, goal, 0.0, 0.0, rng);
    CHECK(a1 == a2);
    CHECK(a1 == learner.act_greedy(obs, obs0, goal));

    Mlp& actor = learner.actor();
    for (int i = actor.w3(); i < actor.param_count(); ++i) actor.params()[i] = 0.0;
    Action zero = learner.act_greedy(obs, obs0, goal);
    for (double v : zero) CHECK(v == 0.0);
  }

  TEST_CASE("polyak fixed points at tau one and zero") {
    RngStream init(5);
    DdpgLearner learner(small_config(), init);
    std::vector<double> before = learner.actor_target().params();
    for (double& p : learner.actor().params()) p += 0.5;

    learner.polyak(1.0);
    CHECK(learner.actor_target().params() == before);

    learner.polyak(0.0);
    CHECK(learner.actor_target().params() == learner.actor().params());
    CHECK(learner.critic_target().params() == learner.critic().params());
  }

  TEST_CASE("critic and actor gradients match finite differences") {
    const double h = 1e-5;
    for (uint64_t seed = 0; seed < 3; ++seed) {
      RngStream rng(derive_seed(seed, "ddpg-grad"));
      LearnerConfig cfg = small_config();
      DdpgLearner learner(cfg, rng);
      const int B = 4;
      const int sdim = cfg.state_dim();
      const int cdim = sdim + kActionDim;
      std::vector<double> SA(B * cdim), S(B * sdim), targets(B);
      for (double& v : SA) v = rng.uniform(-1, 1);
      for (double& v : S) v = rng.uniform(-1, 1);
      for (double& v : targets) v = rng.uniform(-1, 1);

      std::vector<double> grads;
      learner.critic_loss_and_grad(SA.data(), targets.data(), B, grads);
      double worst = 0.0;
      for (int p = 0; p < learner.critic().param_count(); ++p) {
        double saved = learner.critic().params()[p];
        std::vector<double> sink;
        learner.critic().params()[p] = saved + h;
        double up = learner.critic_loss_and_grad(SA.data(), targets.data(), B, sink);
        learner.critic().params()[p] = saved - h;
        double down = learner.critic_loss_and_grad(SA.data(), targets.data(), B, sink);
        learner.critic().params()[p] = saved;
        worst = std::max(worst, rel_err(grads[p], (up - down) / (2 * h)));
      }
      CHECK(worst < 1e-4);

      learner.actor_loss_and_grad(S.data(), B, grads);
      worst = 0.0;
      for (int p = 0; p < learner.actor().param_count(); ++p) {
        double saved = learner.actor().params()[p];
        std::vector<double> sink;
        learner.actor().params()[p] = saved + h;
        double up = learner.actor_loss_and_grad(S.data(), B, sink);
        learner.actor().params()[p] = saved - h;
        double down = learner.actor_loss_and_grad(S.data(), B, sink);
        learner.actor().params()[p] = saved;
        worst = std::max(worst, rel_err(grads[p], (up - down) / (2 * h)));
      }
      CHECK(worst < 1e-4);
    }
  }

  TEST_CASE("hindsight honors the worked ALP distribution") {
    RngStream init(6), rng(7), grng(8);
    LearnerConfig cfg = small_config();
    cfg.rho_positive = 1.0;  // always take the positive branch
    cfg.epsilon_replay = 0.2;
    DdpgLearner learner(cfg, init);
    std::vector<GoalRecord> goals = make_goals(2, cfg.goal_dim, grng);

    LpTracker lp(2);
    // ALP(0) = |1.0 - 0.6| = 0.4, ALP(1) = |0.5 - 0.4| = 0.1
    lp.record(0, 0.6);
    lp.record(0, 1.0);
    lp.record(1, 0.4);
    lp.record(1, 0.5);
    REQUIRE(lp.alp(0) == doctest::Approx(0.4));
    REQUIRE(lp.alp(1) == doctest::Approx(0.1));

    std::vector<TransitionSample> batch(1);
    batch[0] = random_transition(rng);
    auto mask = [](const TransitionSample&) { return uint64_t{0b11}; };

    std::map<int, int> counts;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
      auto aug = learner.hindsight_augment(batch, goals, mask, lp, rng);
      REQUIRE(aug.size() == 1);
      CHECK(aug[0].reward == 1.0);
      ++counts[aug[0].goal_id];
    }
    // P(0) = 0.1 + 0.8 * 0.8 = 0.74
    CHECK(static_cast<double>(counts[0]) / n == doctest::Approx(0.74).epsilon(0.02));
  }

  TEST_CASE("hindsight respects the positive ratio and falls back sensibly") {
    RngStream init(9), rng(10), grng(11);
    LearnerConfig cfg = small_config();
    cfg.rho_positive = 0.5;
    DdpgLearner learner(cfg, init);
    std::vector<GoalRecord> goals = make_goals(4, cfg.goal_dim, grng);
    LpTracker lp(5);

    std::vector<TransitionSample> batch(64);
    for (auto& tr : batch) tr = random_transition(rng);

    SUBCASE("fixed non-empty achieved sets produce rho_pos positives") {
      auto mask = [](const TransitionSample&) { return uint64_t{0b0101}; };
      int positives = 0, total = 0;
      for (int round = 0; round < 200; ++round) {
        auto aug = learner.hindsight_augment(batch, goals, mask, lp, rng);
        for (const auto& a : aug) {
          positives += a.reward > 0.5;
          // positive substitutions come from the achieved set, negatives from its complement
          if (a.reward > 0.5) CHECK((a.goal_id == 0 || a.goal_id == 2));
          else CHECK((a.goal_id == 1 || a.goal_id == 3));
          ++total;
        }
      }
      CHECK(static_cast<double>(positives) / total == doctest::Approx(0.5).epsilon(0.02));
    }
    SUBCASE("empty achieved set forces negative substitution") {
      auto mask = [](const TransitionSample&) { return uint64_t{0}; };
      auto aug = learner.hindsight_augment(batch, goals, mask, lp, rng);
      for (const auto& a : aug) CHECK(a.reward == 0.0);
    }
    SUBCASE("all-achieved transitions substitute positively regardless") {
      auto mask = [](const TransitionSample&) { return uint64_t{0b1111}; };
      auto aug = learner.hindsight_augment(batch, goals, mask, lp, rng);
      for (const auto& a : aug) CHECK(a.reward == 1.0);
    }
  }

  TEST_CASE("update produces finite losses and moves toward targets") {
    RngStream init(12), rng(13), grng(14);
    LearnerConfig cfg = small_config();
    DdpgLearner learner(cfg, init);
    std::vector<GoalRecord> goals = make_goals(1, cfg.goal_dim, grng);
    LpTracker lp(5);

    std::vector<TransitionSample> batch(16);
    for (auto& tr : batch) tr = random_transition(rng);
    auto mask = [](const TransitionSample&) { return uint64_t{1}; };

    double first_loss = -1, last_loss = -1;
    for (int i = 0; i < 100; ++i) {
      auto aug = learner.hindsight_augment(batch, goals, mask, lp, rng);
      LossReport r = learner.update(aug);
      CHECK(std::isfinite(r.critic_loss));
      CHECK(std::isfinite(r.actor_loss));
      CHECK(r.positive_fraction == 1.0);
      if (first_loss < 0) first_loss = r.critic_loss;
      last_loss = r.critic_loss;
    }
    CHECK(last_loss < first_loss);
  }

  TEST_CASE("update aborts on non-finite parameters") {
    RngStream init(15), rng(16), grng(17);
    LearnerConfig cfg = small_config();
    DdpgLearner learner(cfg, init);
    // a poisoned output bias reaches the loss directly (hidden-layer NaNs can
    // die in the rectifier)
    learner.critic().params()[learner.critic().b3()] =
        std::numeric_limits<double>::quiet_NaN();
    std::vector<GoalRecord> goals = make_goals(1, cfg.goal_dim, grng);
    LpTracker lp(5);
    std::vector<TransitionSample> batch(4);
    for (auto& tr : batch) tr = random_transition(rng);
    auto aug = learner.hindsight_augment(
        batch, goals, [](const TransitionSample&) { return uint64_t{1}; }, lp, rng);
    CHECK_THROWS_AS(learner.update(aug), RuntimeAbort);
  }

  TEST_CASE("merge is linear and shape-checked") {
    std::vector<double> base{1.0, -2.0, 3.0};
    std::vector<double> d{0.5, 0.25, -1.0};
    auto one = merge_worker_updates(base, {d});
    CHECK(one == std::vector<double>{1.5, -1.75, 2.0});

    std::vector<double> minus_d{-0.5, -0.25, 1.0};
    CHECK(merge_worker_updates(base, {d, minus_d}) == base);

    std::vector<double> twice_d{1.0, 0.5, -2.0};
    CHECK(merge_worker_updates(base, {d, d}) == merge_worker_updates(base, {twice_d}));

    CHECK_THROWS(merge_worker_updates(base, {{1.0}}));
  }

  TEST_CASE("lp tracker windows match the worked example") {
    LpTracker lp(2);
    lp.record(0, 0.0);
    CHECK(lp.alp(0) == 0.0);  // too short
    lp.record(0, 0.0);
    lp.record(0, 1.0);
    lp.record(0, 1.0);
    CHECK(lp.alp(0) == doctest::Approx(1.0));
    CHECK(lp.competence(0) == 1.0);

    LpTracker flat(2);
    for (int i = 0; i < 6; ++i) flat.record(1, 0.5);
    CHECK(flat.alp(1) == doctest::Approx(0.0));
    CHECK(flat.alp(99) == 0.0);  // unknown goal
  }

  TEST_CASE("epsilon matching is uniform on zero weights") {
    auto p = epsilon_matching({0.0, 0.0, 0.0}, 0.2);
    for (double v : p) CHECK(v == doctest::Approx(1.0 / 3));
    auto q = epsilon_matching({0.4, 0.1}, 0.2);
    CHECK(q[0] == doctest::Approx(0.74));
    CHECK(q[1] == doctest::Approx(0.26));
  }

  TEST_CASE("deterministic updates: same seed, same parameters") {
    auto run = [] {
      RngStream init(21), rng(22), grng(23);
      LearnerConfig cfg = small_config();
      DdpgLearner learner(cfg, init);
      std::vector<GoalRecord> goals = make_goals(2, cfg.goal_dim, grng);
      LpTracker lp(5);
      std::vector<TransitionSample> batch(8);
      for (auto& tr : batch) tr = random_transition(rng);
      for (int i = 0; i < 20; ++i) {
        auto aug = learner.hindsight_augment(
            batch, goals, [](const TransitionSample&) { return uint64_t{0b01}; }, lp, rng);
        learner.update(aug);
      }
      return learner.main_params();
    };
    CHECK(run() == run());
  }
}
