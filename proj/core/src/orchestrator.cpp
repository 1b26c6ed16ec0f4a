#include "le2/orchestrator.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

namespace le2 {

namespace {

double now_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

}  // namespace

struct Trainer::Worker {
  int index = 0;
  ArmToolsToys env;
  ReplayMemory memory;
  GoalSampler sampler;
  std::unique_ptr<DdpgLearner> learner;
  RngStream rng_target, rng_explore, rng_replay, rng_memory;

  // memoized predicted-achieved masks, invalidated on refit/discovery
  uint64_t cache_version = ~0ULL;
  std::unordered_map<uint64_t, uint64_t> mask_cache;

  // per-episode outputs consumed at the barrier
  std::vector<double> pending_delta;
  std::vector<int> last_achieved;
  EpisodeRecord last_episode;
  std::exception_ptr failure;

  Worker(const RunConfig& cfg, int idx)
      : index(idx),
        env(cfg.env),
        memory(static_cast<std::size_t>(cfg.memory.capacity)),
        sampler(cfg.sampler.epsilon_target, cfg.sampler.window),
        rng_target(derive_seed(cfg.seed, "target", idx)),
        rng_explore(derive_seed(cfg.seed, "explore", idx)),
        rng_replay(derive_seed(cfg.seed, "replay", idx)),
        rng_memory(derive_seed(cfg.seed, "memory", idx)) {}
};

Trainer::Trainer(RunConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  init_shared();
  init_workers();

  RngStream init_rng(derive_seed(cfg_.seed, "learner_init"));
  auto proto = std::make_unique<DdpgLearner>(cfg_.learner, init_rng);
  shared_params_ = proto->main_params();
  for (auto& w : workers_) {
    w->learner = std::make_unique<DdpgLearner>(cfg_.learner, init_rng);
    // every worker starts from the same parameter vector; init_rng above only
    // seeds layer shapes, the actual values are overwritten here
    w->learner->set_main_params(shared_params_);
    w->learner->actor_target().params() = proto->actor_target().params();
    w->learner->critic_target().params() = proto->critic_target().params();
  }
}

Trainer::~Trainer() = default;

void Trainer::init_shared() {
  cfg_.learner.goal_dim = 0;  // resolved below from the embedding table

  encoder_ = std::make_unique<GoalEncoder>(EmbeddingTable::load(cfg_.embeddings_path));
  cfg_.learner.goal_dim = encoder_->dim();

  sp_ = std::make_unique<SocialPartner>(SpThresholds{}, cfg_.goal_subset);
  registry_ = std::make_unique<GoalRegistry>(encoder_.get());
  reward_model_ = std::make_unique<RewardModel>(cfg_.reward, encoder_.get());
  lp_ = std::make_unique<LpTracker>(cfg_.learner.lp_window);

  catalog_encodings_.clear();
  for (const CatalogEntry& e : goal_catalog())
    catalog_encodings_.push_back(encoder_->encode(e.description));

  run_dir_ = cfg_.output_dir;
  std::filesystem::create_directories(run_dir_);
  metrics_ = std::make_unique<MetricsWriter>(run_dir_ / "metrics.csv", run_dir_ / "events.jsonl");

  std::ofstream catalog(run_dir_ / "catalog.json");
  catalog << SocialPartner::catalog_json() << '\n';
  std::ofstream config_echo(run_dir_ / "run_config.json");
  config_echo << cfg_.to_json().dump(2) << '\n';
}

void Trainer::init_workers() {
  workers_.clear();
  for (int i = 0; i < cfg_.workers; ++i) workers_.push_back(std::make_unique<Worker>(cfg_, i));
}

uint64_t Trainer::achieved_mask(Worker& w, const TransitionSample& tr,
                                const std::vector<GoalRecord>& goals) {
  const uint64_t version = model_version_ * 4096ULL + goals.size();
  if (w.cache_version != version) {
    w.mask_cache.clear();
    w.cache_version = version;
  }
  const uint64_t key =
      (static_cast<uint64_t>(tr.source_episode) << 16) | static_cast<uint16_t>(tr.t);
  auto it = w.mask_cache.find(key);
  if (it != w.mask_cache.end()) return it->second;

  uint64_t mask = 0;
  if (cfg_.use_oracle_reward) {
    for (std::size_t g = 0; g < goals.size(); ++g)
      if (sp_->oracle_reward(tr.obs_0, tr.obs_next, reg_to_catalog_[g])) mask |= 1ULL << g;
  } else if (reward_model_->fitted()) {
    Obs delta;
    for (int i = 0; i < kObsDim; ++i) delta[i] = tr.obs_next[i] - tr.obs_0[i];
    for (std::size_t g = 0; g < goals.size(); ++g)
      if (reward_model_->predict(tr.obs_next, delta, goals[g].encoding)) mask |= 1ULL << g;
  }
  w.mask_cache.emplace(key, mask);
  return mask;
}

void Trainer::run_episode_phase(Worker& w, int64_t episode) {
  // snapshot the registry for targeting (discoveries by peers may land mid-phase)
  std::vector<GoalRecord> snapshot;
  {
    std::lock_guard lock(registry_mutex_);
    snapshot = registry_->records();
  }

  TargetChoice target = w.sampler.sample_target(snapshot, encoder_->dim(), w.rng_target);

  // rollout with exploration
  const int T = cfg_.env.episode_length;
  WorldState state = w.env.initial_state();
  EpisodeRecord rec;
  rec.episode_id = episode;
  rec.targeted_goal = target.goal_id;
  rec.observations.reserve(T + 1);
  rec.actions.reserve(T);
  rec.observations.push_back(w.env.observe(state));
  const Obs& obs0 = rec.observations.front();
  for (int t = 0; t < T; ++t) {
    Action a = w.learner->act(rec.observations.back(), obs0, target.encoding,
                              cfg_.learner.noise_scale, cfg_.learner.epsilon_random,
                              w.rng_explore);
    state = w.env.step(state, a);
    rec.actions.push_back(a);
    rec.observations.push_back(w.env.observe(state));
  }
  const Obs& obs_final = rec.observations.back();

  // SP description, discovery, reward-model ingestion (shared state, one lock)
  std::vector<int> achieved_reg_ids;
  {
    std::lock_guard lock(registry_mutex_);
    for (int catalog_id : sp_->describe_ids(obs0, obs_final)) {
      const std::string& desc = goal_catalog()[catalog_id].description;
      const int before = registry_->size();
      int reg_id = registry_->register_description(desc, episode);
      if (registry_->size() > before) {
        reg_to_catalog_.push_back(catalog_id);
        metrics_->event({{"event", "discovery"},
                         {"episode", episode},
                         {"worker", w.index},
                         {"goal_id", catalog_id},
                         {"registry_id", reg_id},
                         {"description", desc}});
      }
      achieved_reg_ids.push_back(reg_id);
    }
    std::sort(achieved_reg_ids.begin(), achieved_reg_ids.end());

    std::vector<int> discovered(static_cast<std::size_t>(registry_->size()));
    for (std::size_t i = 0; i < discovered.size(); ++i) discovered[i] = static_cast<int>(i);
    reward_model_->ingest_episode(obs0, obs_final, achieved_reg_ids, discovered, episode);
    snapshot = registry_->records();  // refresh so updates can substitute fresh goals
  }

  rec.achieved_goal_ids = achieved_reg_ids;
  w.last_achieved = achieved_reg_ids;
  if (cfg_.dump_trajectories) w.last_episode = rec;
  w.sampler.update_on_episode(target.goal_id, achieved_reg_ids);
  w.memory.store_episode(std::move(rec));

  // hindsight-augmented update cycles
  if (!snapshot.empty()) {
    auto mask_fn = [this, &w, &snapshot](const TransitionSample& tr) {
      return achieved_mask(w, tr, snapshot);
    };
    const int total_steps = cfg_.learner.update_cycles * cfg_.learner.updates_per_cycle;
    for (int step = 0; step < total_steps; ++step) {
      std::vector<TransitionSample> batch =
          w.memory.sample_transitions(cfg_.learner.batch_size, w.rng_memory);
      std::vector<AugmentedTransition> aug =
          w.learner->hindsight_augment(batch, snapshot, mask_fn, *lp_, w.rng_replay);
      w.learner->update(aug);
    }
  }
}

void Trainer::barrier_merge() {
  std::vector<std::vector<double>> deltas;
  deltas.reserve(workers_.size());
  for (auto& w : workers_) {
    std::vector<double> p = w->learner->main_params();
    for (std::size_t i = 0; i < p.size(); ++i) p[i] -= shared_params_[i];
    deltas.push_back(std::move(p));
  }
  shared_params_ = merge_worker_updates(shared_params_, deltas);
  for (auto& w : workers_) w->learner->set_main_params(shared_params_);

  // union of lifetime description counts so rarity reflects global feedback
  if (workers_.size() > 1) {
    for (auto& w : workers_)
      for (auto& v : workers_)
        if (v->index != w->index) {
          std::map<int, int64_t> delta;
          for (int g : v->last_achieved) ++delta[g];
          w->sampler.add_lifetime_counts(delta);
        }
  }
}

void Trainer::refit_reward_model(int64_t episode) {
  if (cfg_.use_oracle_reward) return;  // the TR-agent never trains or queries it

  std::vector<RewardExample> heldout = reward_model_->examples_since(last_fit_episode_);
  if (reward_model_->fitted() && !heldout.empty()) {
    MetricsReport report = reward_model_->evaluate_recent(heldout, *registry_);
    for (const auto& [reg_id, m] : report.per_goal) {
      int catalog_id = reg_to_catalog_[reg_id];
      metrics_->metric(episode, "precision", "goal", catalog_id, -1, m.precision);
      metrics_->metric(episode, "recall", "goal", catalog_id, -1, m.recall);
      metrics_->metric(episode, "f1", "goal", catalog_id, -1, m.f1);
    }
    metrics_->metric(episode, "precision", "macro", -1, -1, report.macro.precision);
    metrics_->metric(episode, "recall", "macro", -1, -1, report.macro.recall);
    metrics_->metric(episode, "f1", "macro", -1, -1, report.macro.f1);
    metrics_->metric(episode, "precision", "pooled", -1, -1, report.pooled.precision);
    metrics_->metric(episode, "recall", "pooled", -1, -1, report.pooled.recall);
    metrics_->metric(episode, "f1", "pooled", -1, -1, report.pooled.f1);
    latest_macro_f1_ = report.macro.f1;
  }

  if (reward_model_->store().empty()) return;
  RngStream set_rng(derive_seed(cfg_.seed, "train_set", static_cast<uint64_t>(fit_index_)));
  std::vector<TrainRow> rows = reward_model_->build_training_set(
      cfg_.reward.per_goal_cap, cfg_.reward.min_positive_fraction, *registry_, set_rng, episode);
  if (rows.empty()) return;
  reward_model_->fit(rows, derive_seed(cfg_.seed, "forest", static_cast<uint64_t>(fit_index_)));
  ++fit_index_;
  last_fit_episode_ = episode;
  ++model_version_;
  metrics_->event({{"event", "refit"},
                   {"episode", episode},
                   {"rows", rows.size()},
                   {"degenerate", reward_model_->forest().degenerate()}});
}

void Trainer::self_evaluate(int64_t episode) {
  if (registry_->size() == 0) return;
  DdpgLearner& learner = *workers_.front()->learner;
  ArmToolsToys& env = workers_.front()->env;
  const int T = cfg_.env.episode_length;
  const int rollouts = std::max(1, cfg_.learner.self_eval_rollouts);

  for (int g = 0; g < registry_->size(); ++g) {
    const GoalRecord& rec = registry_->record(g);
    int successes = 0;
    for (int r = 0; r < rollouts; ++r) {
      WorldState state = env.initial_state();
      Obs obs0 = env.observe(state);
      Obs obs = obs0;
      for (int t = 0; t < T; ++t) {
        Action a = learner.act_greedy(obs, obs0, rec.encoding);
        state = env.step(state, a);
        obs = env.observe(state);
      }
      int success = 0;
      if (cfg_.use_oracle_reward) {
        success = sp_->oracle_reward(obs0, obs, reg_to_catalog_[g]);
      } else if (reward_model_->fitted()) {
        Obs delta;
        for (int i = 0; i < kObsDim; ++i) delta[i] = obs[i] - obs0[i];
        success = reward_model_->predict(obs, delta, rec.encoding);
      }
      successes += success;
    }
    lp_->record(g, static_cast<double>(successes) / static_cast<double>(rollouts));
    metrics_->metric(episode, "competence", "goal", reg_to_catalog_[g], -1,
                     lp_->competence(g));
    metrics_->metric(episode, "alp", "goal", reg_to_catalog_[g], -1, lp_->alp(g));
  }
}

EvalPoint Trainer::offline_evaluate(int64_t episode) {
  EvalPoint point;
  point.episode = episode;
  point.discovered_goals = registry_->size();
  point.macro_f1 = latest_macro_f1_;

  DdpgLearner& learner = *workers_.front()->learner;
  ArmToolsToys& env = workers_.front()->env;
  const int T = cfg_.env.episode_length;

  double mean = 0.0;
  for (const CatalogEntry& entry : goal_catalog()) {
    int successes = 0;
    for (int k = 0; k < cfg_.eval_episodes_per_goal; ++k) {
      WorldState state = env.initial_state();
      Obs obs0 = env.observe(state);
      Obs obs = obs0;
      for (int t = 0; t < T; ++t) {
        Action a = learner.act_greedy(obs, obs0, catalog_encodings_[entry.id]);
        state = env.step(state, a);
        obs = env.observe(state);
      }
      successes += sp_->oracle_reward(obs0, obs, entry.id);
    }
    double rate = cfg_.eval_episodes_per_goal > 0
                      ? static_cast<double>(successes) / cfg_.eval_episodes_per_goal
                      : 0.0;
    point.per_goal_success[entry.id] = rate;
    mean += rate;
    metrics_->metric(episode, "success_rate", "goal", entry.id, -1, rate);
  }
  point.mean_success = mean / static_cast<double>(goal_catalog().size());
  metrics_->metric(episode, "success_rate", "macro", -1, -1, point.mean_success);
  return point;
}

void Trainer::emit_sampler_metrics(int64_t episode) {
  if (registry_->size() == 0) return;
  const GoalSampler& sampler = workers_.front()->sampler;
  SelectionDistribution dist = sampler.selection_probabilities(registry_->size());
  for (int g = 0; g < registry_->size(); ++g) {
    metrics_->metric(episode, "selection_value", "goal", reg_to_catalog_[g], -1, dist.values[g]);
    metrics_->metric(episode, "selection_probability", "goal", reg_to_catalog_[g], -1,
                     dist.probabilities[g]);
  }
  for (int target = 0; target < registry_->size(); ++target)
    for (int reached = 0; reached < registry_->size(); ++reached)
      metrics_->metric(episode, "confusion", "goal", reg_to_catalog_[target],
                       reg_to_catalog_[reached], sampler.freq(reached, target));
}

TrainReport Trainer::train(const TrainHooks& hooks) {
  TrainReport report;
  report.run_dir = run_dir_;
  const double t_start = now_seconds();
  metrics_->event({{"event", "run_start"},
                   {"episode", episode_},
                   {"workers", cfg_.workers},
                   {"use_oracle_reward", cfg_.use_oracle_reward},
                   {"seed", cfg_.seed}});

  std::ofstream trajectories;
  if (cfg_.dump_trajectories)
    trajectories.open(run_dir_ / "trajectories.jsonl",
                      episode_ > 0 ? std::ios::app : std::ios::trunc);

  try {
    while (episode_ < cfg_.total_episodes) {
      const int64_t e = episode_;
      if (workers_.size() == 1) {
        run_episode_phase(*workers_.front(), e);
      } else {
        std::vector<std::thread> threads;
        threads.reserve(workers_.size());
        for (auto& w : workers_) {
          Worker* wp = w.get();
          threads.emplace_back([this, wp, e] {
            try {
              run_episode_phase(*wp, e);
            } catch (...) {
              wp->failure = std::current_exception();
            }
          });
        }
        for (auto& t : threads) t.join();
        for (auto& w : workers_)
          if (w->failure) std::rethrow_exception(w->failure);
      }
      barrier_merge();
      if (cfg_.dump_trajectories)
        for (auto& w : workers_) append_trajectory(trajectories, w->last_episode);

      ++episode_;
      const int64_t done = episode_;
      if (done % cfg_.reward.refit_cadence == 0) refit_reward_model(done);
      if (done % cfg_.eval_cadence == 0) {
        self_evaluate(done);
        bool stop = false;
        if (cfg_.eval_episodes_per_goal > 0) {
          EvalPoint point = offline_evaluate(done);
          report.final_mean_success = point.mean_success;
          stop = hooks.on_eval && hooks.on_eval(point);
        }
        emit_sampler_metrics(done);
        metrics_->flush();
        if (stop) {
          report.stopped_early = true;
          break;
        }
      }
      if (cfg_.checkpoint_cadence > 0 && done % cfg_.checkpoint_cadence == 0)
        write_checkpoint("ep" + std::to_string(done));
    }
  } catch (const std::exception& ex) {
    std::filesystem::path p = write_checkpoint("abort");
    metrics_->event(
        {{"event", "abort"}, {"episode", episode_}, {"error", ex.what()}, {"checkpoint", p.string()}});
    metrics_->flush();
    throw RuntimeAbort(std::string(ex.what()) + " (checkpoint written to " + p.string() + ")");
  }

  report.episodes_run = episode_;
  report.discovered_goals = registry_->size();
  report.checkpoint_path = write_checkpoint("final");
  metrics_->event({{"event", "run_end"},
                   {"episode", episode_},
                   {"discovered", registry_->size()},
                   {"wall_seconds", now_seconds() - t_start}});
  metrics_->flush();
  return report;
}

TrainReport train_run(RunConfig cfg, const TrainHooks& hooks) {
  Trainer trainer(std::move(cfg));
  return trainer.train(hooks);
}

// ---------------------------------------------------------------------------
// checkpointing

std::filesystem::path Trainer::write_checkpoint(const std::string& tag) const {
  std::filesystem::path path = run_dir_ / ("checkpoint_" + tag + ".le2ckpt");
  BlobWriter blob(path);

  nlohmann::json header;
  header["schema_version"] = kCheckpointSchemaVersion;
  header["config"] = cfg_.to_json();
  header["episode"] = episode_;
  header["fit_index"] = fit_index_;
  header["last_fit_episode"] = last_fit_episode_;
  header["model_version"] = model_version_;
  header["registry"] = nlohmann::json::parse(registry_->to_json_string());
  header["reg_to_catalog"] = reg_to_catalog_;
  if (latest_macro_f1_) header["latest_macro_f1"] = *latest_macro_f1_;

  nlohmann::json lp = nlohmann::json::object();
  for (const auto& [g, hist] : lp_->histories()) lp[std::to_string(g)] = hist;
  header["lp"] = lp;

  header["forest_fitted"] = reward_model_->fitted();
  if (reward_model_->fitted()) {
    header["forest_dim"] = reward_model_->forest().dim();
    header["forest_degenerate"] = reward_model_->forest().degenerate();
  }

  nlohmann::json workers = nlohmann::json::array();
  for (const auto& w : workers_) {
    nlohmann::json jw;
    jw["sampler"] = nlohmann::json::parse(w->sampler.to_json_string());
    jw["rng"] = {{"target", w->rng_target.state()},
                 {"explore", w->rng_explore.state()},
                 {"replay", w->rng_replay.state()},
                 {"memory", w->rng_memory.state()}};
    jw["adam_actor_t"] = w->learner->actor_opt().step_count();
    jw["adam_critic_t"] = w->learner->critic_opt().step_count();
    nlohmann::json mem_meta = nlohmann::json::array();
    for (const EpisodeRecord& e : w->memory.episodes()) {
      nlohmann::json je{{"id", e.episode_id},
                        {"T", e.actions.size()},
                        {"achieved", e.achieved_goal_ids}};
      if (e.targeted_goal) je["targeted"] = *e.targeted_goal;
      mem_meta.push_back(std::move(je));
    }
    jw["memory_meta"] = std::move(mem_meta);
    nlohmann::json counts = nlohmann::json::array();
    for (const auto& [g, c] : w->memory.reward_counts()) counts.push_back({g, c});
    jw["memory_lifetime_counts"] = std::move(counts);
    workers.push_back(std::move(jw));
  }
  header["workers"] = std::move(workers);

  header["n_examples"] = reward_model_->store().size();

  blob.write_header(header);

  for (const auto& w : workers_) {
    const std::string p = "w" + std::to_string(w->index) + "/";
    blob.write_f64(p + "actor", w->learner->actor().params());
    blob.write_f64(p + "critic", w->learner->critic().params());
    blob.write_f64(p + "actor_target", w->learner->actor_target().params());
    blob.write_f64(p + "critic_target", w->learner->critic_target().params());
    blob.write_f64(p + "adam_actor_m", w->learner->actor_opt().moment1());
    blob.write_f64(p + "adam_actor_v", w->learner->actor_opt().moment2());
    blob.write_f64(p + "adam_critic_m", w->learner->critic_opt().moment1());
    blob.write_f64(p + "adam_critic_v", w->learner->critic_opt().moment2());

    std::vector<double> obs_flat, act_flat;
    for (const EpisodeRecord& e : w->memory.episodes()) {
      for (const Obs& o : e.observations) obs_flat.insert(obs_flat.end(), o.begin(), o.end());
      for (const Action& a : e.actions) act_flat.insert(act_flat.end(), a.begin(), a.end());
    }
    blob.write_f64(p + "mem_obs", obs_flat);
    blob.write_f64(p + "mem_act", act_flat);
  }

  std::vector<double> ex_f64;
  std::vector<int64_t> ex_i64;
  ex_f64.reserve(reward_model_->store().size() * 2 * kObsDim);
  for (const RewardExample& ex : reward_model_->store()) {
    ex_f64.insert(ex_f64.end(), ex.final_obs.begin(), ex.final_obs.end());
    ex_f64.insert(ex_f64.end(), ex.delta_obs.begin(), ex.delta_obs.end());
    ex_i64.push_back(ex.goal_id);
    ex_i64.push_back(ex.label);
    ex_i64.push_back(ex.episode_id);
  }
  blob.write_f64("examples_f64", ex_f64);
  blob.write_i64("examples_i64", ex_i64);

  if (reward_model_->fitted()) {
    std::vector<int64_t> nodes_i64, offsets;
    std::vector<double> nodes_f64;
    for (const auto& tree : reward_model_->forest().trees()) {
      offsets.push_back(static_cast<int64_t>(nodes_f64.size() / 2));
      for (const TreeNode& n : tree) {
        nodes_i64.push_back(n.feature);
        nodes_i64.push_back(n.left);
        nodes_i64.push_back(n.right);
        nodes_f64.push_back(n.threshold);
        nodes_f64.push_back(n.value);
      }
    }
    offsets.push_back(static_cast<int64_t>(nodes_f64.size() / 2));
    blob.write_i64("forest_nodes_i64", nodes_i64);
    blob.write_f64("forest_nodes_f64", nodes_f64);
    blob.write_i64("forest_offsets", offsets);
  }

  blob.close();
  return path;
}

void Trainer::restore_from(const BlobReader& reader) {
  const nlohmann::json& h = reader.header();
  if (h.at("schema_version").get<int>() != kCheckpointSchemaVersion)
    throw std::runtime_error("checkpoint: unsupported schema version");

  episode_ = h.at("episode").get<int64_t>();
  fit_index_ = h.at("fit_index").get<int64_t>();
  last_fit_episode_ = h.at("last_fit_episode").get<int64_t>();
  model_version_ = h.at("model_version").get<uint64_t>();
  if (h.contains("latest_macro_f1")) latest_macro_f1_ = h.at("latest_macro_f1").get<double>();

  registry_ = std::make_unique<GoalRegistry>(
      GoalRegistry::from_json_string(h.at("registry").dump(), encoder_.get()));
  reg_to_catalog_ = h.at("reg_to_catalog").get<std::vector<int>>();

  std::map<int, std::vector<double>> lp_hist;
  for (const auto& [key, hist] : h.at("lp").items())
    lp_hist[std::stoi(key)] = hist.get<std::vector<double>>();
  lp_->restore(std::move(lp_hist));

  // reward example store
  std::vector<double> ex_f64 = reader.f64("examples_f64");
  std::vector<int64_t> ex_i64 = reader.i64("examples_i64");
  std::vector<RewardExample> store(ex_i64.size() / 3);
  for (std::size_t i = 0; i < store.size(); ++i) {
    RewardExample& ex = store[i];
    std::copy_n(ex_f64.begin() + static_cast<std::ptrdiff_t>(i * 2 * kObsDim), kObsDim,
                ex.final_obs.begin());
    std::copy_n(ex_f64.begin() + static_cast<std::ptrdiff_t>(i * 2 * kObsDim + kObsDim), kObsDim,
                ex.delta_obs.begin());
    ex.goal_id = static_cast<int>(ex_i64[i * 3]);
    ex.label = static_cast<int>(ex_i64[i * 3 + 1]);
    ex.episode_id = ex_i64[i * 3 + 2];
  }
  reward_model_->restore_store(std::move(store));

  if (h.at("forest_fitted").get<bool>()) {
    std::vector<int64_t> nodes_i64 = reader.i64("forest_nodes_i64");
    std::vector<double> nodes_f64 = reader.f64("forest_nodes_f64");
    std::vector<int64_t> offsets = reader.i64("forest_offsets");
    std::vector<std::vector<TreeNode>> trees;
    for (std::size_t t = 0; t + 1 < offsets.size(); ++t) {
      std::vector<TreeNode> tree;
      for (int64_t n = offsets[t]; n < offsets[t + 1]; ++n) {
        TreeNode node;
        node.feature = static_cast<int32_t>(nodes_i64[n * 3]);
        node.left = static_cast<int32_t>(nodes_i64[n * 3 + 1]);
        node.right = static_cast<int32_t>(nodes_i64[n * 3 + 2]);
        node.threshold = nodes_f64[n * 2];
        node.value = nodes_f64[n * 2 + 1];
        tree.push_back(node);
      }
      trees.push_back(std::move(tree));
    }
    reward_model_->set_forest(RandomForest::from_parts(
        std::move(trees), h.at("forest_dim").get<int>(), h.at("forest_degenerate").get<bool>()));
  }

  // workers
  const nlohmann::json& jworkers = h.at("workers");
  for (std::size_t wi = 0; wi < workers_.size(); ++wi) {
    Worker& w = *workers_[wi];
    const nlohmann::json& jw = jworkers.at(wi);
    w.sampler = GoalSampler::from_json_string(jw.at("sampler").dump());
    w.rng_target.set_state(jw.at("rng").at("target").get<std::string>());
    w.rng_explore.set_state(jw.at("rng").at("explore").get<std::string>());
    w.rng_replay.set_state(jw.at("rng").at("replay").get<std::string>());
    w.rng_memory.set_state(jw.at("rng").at("memory").get<std::string>());

    const std::string p = "w" + std::to_string(wi) + "/";
    w.learner->actor().params() = reader.f64(p + "actor");
    w.learner->critic().params() = reader.f64(p + "critic");
    w.learner->actor_target().params() = reader.f64(p + "actor_target");
    w.learner->critic_target().params() = reader.f64(p + "critic_target");
    w.learner->actor_opt().restore(reader.f64(p + "adam_actor_m"), reader.f64(p + "adam_actor_v"),
                                   jw.at("adam_actor_t").get<int64_t>());
    w.learner->critic_opt().restore(reader.f64(p + "adam_critic_m"),
                                    reader.f64(p + "adam_critic_v"),
                                    jw.at("adam_critic_t").get<int64_t>());

    std::vector<double> obs_flat = reader.f64(p + "mem_obs");
    std::vector<double> act_flat = reader.f64(p + "mem_act");
    std::size_t obs_pos = 0, act_pos = 0;
    for (const auto& je : jw.at("memory_meta")) {
      EpisodeRecord e;
      e.episode_id = je.at("id").get<int64_t>();
      const int T = je.at("T").get<int>();
      e.achieved_goal_ids = je.at("achieved").get<std::vector<int>>();
      if (je.contains("targeted")) e.targeted_goal = je.at("targeted").get<int>();
      e.observations.resize(T + 1);
      e.actions.resize(T);
      for (Obs& o : e.observations) {
        std::copy_n(obs_flat.begin() + static_cast<std::ptrdiff_t>(obs_pos), kObsDim, o.begin());
        obs_pos += kObsDim;
      }
      for (Action& a : e.actions) {
        std::copy_n(act_flat.begin() + static_cast<std::ptrdiff_t>(act_pos), kActionDim,
                    a.begin());
        act_pos += kActionDim;
      }
      w.memory.store_episode(std::move(e));
    }
    std::map<int, int64_t> counts;
    for (const auto& pair : jw.at("memory_lifetime_counts"))
      counts[pair.at(0).get<int>()] = pair.at(1).get<int64_t>();
    w.memory.set_lifetime_counts(std::move(counts));
  }

  shared_params_ = workers_.front()->learner->main_params();
}

std::unique_ptr<Trainer> Trainer::resume(const std::filesystem::path& checkpoint,
                                         std::optional<int64_t> total_episodes,
                                         std::optional<std::string> output_dir) {
  BlobReader reader(checkpoint);
  RunConfig cfg = RunConfig::from_json(reader.header().at("config"));
  if (total_episodes) cfg.total_episodes = *total_episodes;
  if (output_dir) cfg.output_dir = *output_dir;
  auto trainer = std::unique_ptr<Trainer>(new Trainer(cfg));
  trainer->restore_from(reader);
  return trainer;
}

// ---------------------------------------------------------------------------
// evaluate / export

EvalTable evaluate_checkpoint(const std::filesystem::path& checkpoint, int episodes_per_goal) {
  if (episodes_per_goal < 0) throw ConfigError("evaluate: episodes_per_goal must be >= 0");
  BlobReader reader(checkpoint);
  RunConfig cfg = RunConfig::from_json(reader.header().at("config"));

  EvalTable table;
  table.episodes_per_goal = episodes_per_goal;
  if (episodes_per_goal == 0) return table;

  GoalEncoder encoder(EmbeddingTable::load(cfg.embeddings_path));
  cfg.learner.goal_dim = encoder.dim();
  RngStream dummy(0);
  DdpgLearner learner(cfg.learner, dummy);
  learner.actor().params() = reader.f64("w0/actor");
  ArmToolsToys env(cfg.env);
  SocialPartner sp;  // unrestricted: the evaluation covers the full catalog
  const int T = cfg.env.episode_length;

  double mean = 0.0;
  for (const CatalogEntry& entry : goal_catalog()) {
    std::vector<double> enc = encoder.encode(entry.description);
    int successes = 0;
    for (int k = 0; k < episodes_per_goal; ++k) {
      WorldState state = env.initial_state();
      Obs obs0 = env.observe(state);
      Obs obs = obs0;
      for (int t = 0; t < T; ++t) {
        Action a = learner.act_greedy(obs, obs0, enc);
        state = env.step(state, a);
        obs = env.observe(state);
      }
      successes += sp.oracle_reward(obs0, obs, entry.id);
    }
    double rate = static_cast<double>(successes) / episodes_per_goal;
    table.per_goal[entry.id] = rate;
    mean += rate;
  }
  table.mean_success = mean / static_cast<double>(goal_catalog().size());
  return table;
}

namespace {

struct MetricRow {
  int64_t episode;
  std::string metric, scope;
  int goal_id = -1, aux_id = -1;
  std::string value;
};

std::vector<MetricRow> read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("export: missing metrics stream: " + path.string());
  std::vector<MetricRow> rows;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    MetricRow r;
    std::istringstream ls(line);
    std::string field;
    std::getline(ls, field, ',');
    r.episode = std::stoll(field);
    std::getline(ls, r.metric, ',');
    std::getline(ls, r.scope, ',');
    std::getline(ls, field, ',');
    if (!field.empty()) r.goal_id = std::stoi(field);
    std::getline(ls, field, ',');
    if (!field.empty()) r.aux_id = std::stoi(field);
    std::getline(ls, r.value, ',');
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace

void export_run(const std::filesystem::path& run_dir) {
  std::vector<MetricRow> rows = read_metrics_csv(run_dir / "metrics.csv");
  std::filesystem::path out_dir = run_dir / "export";
  std::filesystem::create_directories(out_dir);

  std::ofstream success(out_dir / "success_rate.csv");
  success << "episode,goal_id,success_rate\n";
  std::ofstream f1(out_dir / "f1.csv");
  f1 << "episode,scope,goal_id,f1\n";
  std::map<std::pair<int64_t, int>, std::pair<std::string, std::string>> selection;
  int64_t last_confusion_episode = -1;
  for (const MetricRow& r : rows) {
    if (r.metric == "success_rate" && r.scope == "goal")
      success << r.episode << ',' << r.goal_id << ',' << r.value << '\n';
    else if (r.metric == "f1")
      f1 << r.episode << ',' << (r.scope == "goal" ? "per_goal" : r.scope) << ','
         << (r.goal_id >= 0 ? std::to_string(r.goal_id) : "") << ',' << r.value << '\n';
    else if (r.metric == "selection_value")
      selection[{r.episode, r.goal_id}].first = r.value;
    else if (r.metric == "selection_probability")
      selection[{r.episode, r.goal_id}].second = r.value;
    else if (r.metric == "confusion")
      last_confusion_episode = std::max(last_confusion_episode, r.episode);
  }

  std::ofstream sel(out_dir / "goal_selection_probabilities.csv");
  sel << "episode,goal_id,value,probability\n";
  for (const auto& [key, vp] : selection)
    sel << key.first << ',' << key.second << ',' << vp.first << ',' << vp.second << '\n';

  std::ofstream confusion(out_dir / "confusion_matrix.csv");
  confusion << "target_goal,reached_goal,freq\n";
  for (const MetricRow& r : rows)
    if (r.metric == "confusion" && r.episode == last_confusion_episode)
      confusion << r.goal_id << ',' << r.aux_id << ',' << r.value << '\n';

  // discovery episodes from the event log
  std::map<int, int64_t> discovery;
  {
    std::ifstream events(run_dir / "events.jsonl");
    if (!events) throw ConfigError("export: missing event log in " + run_dir.string());
    std::string line;
    while (std::getline(events, line)) {
      if (line.empty()) continue;
      nlohmann::json j = nlohmann::json::parse(line);
      if (j.value("event", "") == "discovery")
        discovery[j.at("goal_id").get<int>()] = j.at("episode").get<int64_t>();
    }
  }

  std::map<std::pair<int64_t, int>, std::string> f1_by_point, success_by_point;
  std::set<int64_t> eval_episodes;
  for (const MetricRow& r : rows) {
    if (r.scope != "goal") continue;
    if (r.metric == "f1") f1_by_point[{r.episode, r.goal_id}] = r.value;
    if (r.metric == "success_rate") {
      success_by_point[{r.episode, r.goal_id}] = r.value;
      eval_episodes.insert(r.episode);
    }
  }
  std::ofstream timeline(out_dir / "per_goal_timeline.csv");
  timeline << "goal_id,discovery_episode,episode,f1,success_rate\n";
  for (const CatalogEntry& entry : goal_catalog()) {
    for (int64_t ep : eval_episodes) {
      timeline << entry.id << ',';
      auto d = discovery.find(entry.id);
      if (d != discovery.end()) timeline << d->second;
      timeline << ',' << ep << ',';
      auto f = f1_by_point.find({ep, entry.id});
      if (f != f1_by_point.end()) timeline << f->second;
      timeline << ',';
      auto s = success_by_point.find({ep, entry.id});
      if (s != success_by_point.end()) timeline << s->second;
      timeline << '\n';
    }
  }
}

}  // namespace le2
