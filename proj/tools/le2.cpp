// le2 command line: train / evaluate / export.
//
// Exit codes: 0 success, 2 configuration error, 3 runtime abort (a checkpoint
// is written before aborting).

#include <cstdio>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "le2/config.hpp"
#include "le2/orchestrator.hpp"
#include "le2/types.hpp"

namespace {

int run_train(const std::string& config_path, std::optional<uint64_t> seed,
              std::optional<int> workers, bool use_oracle_reward,
              const std::string& goal_subset) {
  le2::RunConfig cfg = le2::RunConfig::load(config_path);
  cfg.apply_env_overrides();
  if (seed) cfg.seed = *seed;
  if (workers) cfg.workers = *workers;
  if (use_oracle_reward) cfg.use_oracle_reward = true;
  if (!goal_subset.empty()) cfg.goal_subset = le2::parse_goal_subset(goal_subset);

  le2::TrainReport report = le2::train_run(cfg);
  std::printf("run complete: %lld episodes/worker, %d goals discovered\n",
              static_cast<long long>(report.episodes_run), report.discovered_goals);
  if (report.final_mean_success)
    std::printf("final mean success over the catalog: %.4f\n", *report.final_mean_success);
  std::printf("run dir: %s\ncheckpoint: %s\n", report.run_dir.c_str(),
              report.checkpoint_path.c_str());
  return 0;
}

int run_evaluate(const std::string& checkpoint, int episodes_per_goal) {
  le2::EvalTable table = le2::evaluate_checkpoint(checkpoint, episodes_per_goal);
  std::printf("goal_id,description,success_rate\n");
  for (const auto& [goal_id, rate] : table.per_goal)
    std::printf("%d,\"%s\",%.4f\n", goal_id, le2::goal_catalog()[goal_id].description.c_str(),
                rate);
  if (!table.per_goal.empty()) std::printf("mean,,%.4f\n", table.mean_success);
  return 0;
}

int run_export(const std::string& run_dir) {
  le2::export_run(run_dir);
  std::printf("export written to %s/export\n", run_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LE2 training workbench: a language-goal multi-goal RL agent"};
  app.require_subcommand(1);

  std::string config_path, goal_subset, checkpoint, run_dir;
  std::optional<uint64_t> seed;
  std::optional<int> workers;
  bool use_oracle_reward = false;
  int episodes_per_goal = 0;

  CLI::App* train = app.add_subcommand("train", "Run the training loop");
  train->add_option("--config", config_path, "TOML run configuration")->required();
  train->add_option("--seed", seed, "Master seed override");
  train->add_option("--workers", workers, "Worker count override");
  train->add_flag("--use-oracle-reward", use_oracle_reward,
                  "TR-agent ablation: use the true reward function");
  train->add_option("--goal-subset", goal_subset, "Restrict the SP catalog, e.g. 0..8 or 0,3,7");

  CLI::App* evaluate = app.add_subcommand("evaluate", "Offline oracle evaluation of a checkpoint");
  evaluate->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
  evaluate->add_option("--episodes-per-goal", episodes_per_goal, "Rollouts per catalog goal")
      ->required();

  CLI::App* exp = app.add_subcommand("export", "Derive plot-ready CSVs from a run directory");
  exp->add_option("--run", run_dir, "Run directory with metrics.csv")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed())
      return run_train(config_path, seed, workers, use_oracle_reward, goal_subset);
    if (evaluate->parsed()) return run_evaluate(checkpoint, episodes_per_goal);
    if (exp->parsed()) return run_export(run_dir);
  } catch (const le2::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const le2::RuntimeAbort& e) {
    std::fprintf(stderr, "runtime abort: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
