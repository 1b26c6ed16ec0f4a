#include <cstdlib>
#include <fstream>

#include "doctest.h"
#include "le2/config.hpp"
#include "le2/toml_lite.hpp"
#include "test_helpers.hpp"

using namespace le2;

TEST_SUITE("toml_config") {
  TEST_CASE("parses sections, scalars, arrays and comments") {
    const std::string text = R"(# run configuration
seed = 42
total_episodes = 1_000
use_oracle_reward = false
output_dir = "runs/demo"   # trailing comment
goal_subset = [0, 1, 2]

[learner]
gamma = 0.98
actor_lr = 1e-3
hidden = 64

[env]
link_lengths = [0.5, 0.3, 0.2]
)";
    nlohmann::json j = parse_toml(text, "test.toml");
    CHECK(j.at("seed").get<int64_t>() == 42);
    CHECK(j.at("total_episodes").get<int64_t>() == 1000);
    CHECK(j.at("use_oracle_reward").get<bool>() == false);
    CHECK(j.at("output_dir").get<std::string>() == "runs/demo");
    CHECK(j.at("goal_subset").get<std::vector<int>>() == std::vector<int>{0, 1, 2});
    CHECK(j.at("learner").at("gamma").get<double>() == 0.98);
    CHECK(j.at("learner").at("actor_lr").get<double>() == 1e-3);
    CHECK(j.at("env").at("link_lengths").get<std::vector<double>>() ==
          std::vector<double>{0.5, 0.3, 0.2});
  }

  TEST_CASE("errors carry line numbers") {
    auto expect_line = [](const std::string& text, const std::string& needle) {
      try {
        parse_toml(text, "bad.toml");
        FAIL("expected ConfigError");
      } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find(needle) != std::string::npos);
      }
    };
    expect_line("a = 1\nb 2\n", "bad.toml:2");
    expect_line("a = 1\nb = [1, 2\n", "bad.toml:2");
    expect_line("x = zzz\n", "bad.toml:1");
    expect_line("a = 1\na = 2\n", "duplicate key");
  }

  TEST_CASE("round-trips a RunConfig through toml") {
    auto path = std::filesystem::temp_directory_path() / "le2_cfg_test.toml";
    {
      std::ofstream out(path);
      out << "seed = 9\n";
      out << "workers = 1\n";
      out << "total_episodes = 12\n";
      out << "embeddings_path = \"" << test::bundled_embeddings().string() << "\"\n";
      out << "output_dir = \"/tmp/le2_cfg_run\"\n";
      out << "goal_subset = [0, 1, 2, 3]\n";
      out << "[learner]\n";
      out << "hidden = 32\n";
      out << "batch_size = 16\n";
      out << "[reward_model]\n";
      out << "n_trees = 10\n";
      out << "[memory]\n";
      out << "capacity = 500\n";
    }
    RunConfig cfg = RunConfig::load(path);
    cfg.validate();
    CHECK(cfg.seed == 9);
    CHECK(cfg.workers == 1);
    CHECK(cfg.total_episodes == 12);
    CHECK(cfg.learner.hidden == 32);
    CHECK(cfg.learner.batch_size == 16);
    CHECK(cfg.reward.forest.n_trees == 10);
    CHECK(cfg.memory.capacity == 500);
    REQUIRE(cfg.goal_subset.has_value());
    CHECK(cfg.goal_subset->size() == 4);
    // defaults survive partial files
    CHECK(cfg.learner.gamma == 0.98);
    CHECK(cfg.learner.tau == 0.95);
    CHECK(cfg.eval_cadence == 600);
  }

  TEST_CASE("validation rejects bad values") {
    RunConfig cfg;
    cfg.embeddings_path = test::bundled_embeddings().string();
    cfg.validate();  // defaults are fine

    RunConfig bad = cfg;
    bad.workers = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.goal_subset = std::vector<int>{51};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.eval_cadence = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.embeddings_path.clear();
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.learner.rho_positive = 1.5;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
  }

  TEST_CASE("config json round-trip preserves values") {
    RunConfig cfg;
    cfg.seed = 77;
    cfg.embeddings_path = "emb.txt";
    cfg.goal_subset = std::vector<int>{0, 8, 31};
    cfg.learner.hidden = 48;
    cfg.env.grab_radius = 0.12;
    RunConfig back = RunConfig::from_json(cfg.to_json());
    CHECK(back.seed == 77);
    CHECK(back.goal_subset == cfg.goal_subset);
    CHECK(back.learner.hidden == 48);
    CHECK(back.env.grab_radius == 0.12);
    CHECK(back.env.tip_angle_init[0] == cfg.env.tip_angle_init[0]);
  }

  TEST_CASE("goal subset expressions") {
    CHECK(parse_goal_subset("0..8") ==
          std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7, 8});
    CHECK(parse_goal_subset("3") == std::vector<int>{3});
    CHECK(parse_goal_subset("0,2,4") == std::vector<int>{0, 2, 4});
    CHECK(parse_goal_subset("0..2,31,40..41") == std::vector<int>{0, 1, 2, 31, 40, 41});
    CHECK_THROWS_AS(parse_goal_subset("8..0"), ConfigError);
    CHECK_THROWS_AS(parse_goal_subset("a"), ConfigError);
    CHECK_THROWS_AS(parse_goal_subset(""), ConfigError);
  }

  TEST_CASE("environment overrides take effect") {
    RunConfig cfg;
    cfg.embeddings_path = "x";
    setenv("LE2_SEED", "1234", 1);
    setenv("LE2_WORKERS", "3", 1);
    cfg.apply_env_overrides();
    unsetenv("LE2_SEED");
    unsetenv("LE2_WORKERS");
    CHECK(cfg.seed == 1234);
    CHECK(cfg.workers == 3);
  }
}
