#include <algorithm>
#include <set>

#include "doctest.h"
#include "le2/rng.hpp"
#include "le2/social_partner.hpp"
#include "test_helpers.hpp"

using namespace le2;
using test::ObsBuilder;

namespace {

Obs random_obs(RngStream& rng) {
  Obs o;
  for (double& v : o) v = rng.uniform(-1.5, 1.5);
  return o;
}

bool contains(const std::vector<int>& ids, int id) {
  return std::find(ids.begin(), ids.end(), id) != ids.end();
}

}  // namespace

TEST_SUITE("social_partner") {
  TEST_CASE("catalog holds the canonical 51 descriptions") {
    const auto& cat = goal_catalog();
    REQUIRE(cat.size() == 51);
    CHECK(cat[0].description == "Shift the hand to the right");
    CHECK(cat[9].description == "Grasp the magnetic stick");
    CHECK(cat[10].description == "Grasp the scratch stick");
    CHECK(cat[29].description == "Bring the magnetic stick closer to the magnet");
    CHECK(cat[31].description == "Grasp the magnet");
    CHECK(cat[40].description == "Move the magnet to the bottom right area");
    CHECK(cat[50].description == "Move the scratch to the bottom left area");
    std::set<std::string> unique;
    for (const auto& e : cat) unique.insert(e.description);
    CHECK(unique.size() == 51);
  }

  TEST_CASE("a pure rightward hand shift yields exactly one description") {
    SocialPartner sp;
    Obs initial = ObsBuilder().build();
    Obs final = ObsBuilder().shift(obs_slot::gripper, {0.3, 0.0}).build();
    auto ids = sp.describe_ids(initial, final);
    REQUIRE(ids.size() == 1);
    CHECK(ids[0] == 0);  // y margin fails, so no area description
  }

  TEST_CASE("a null trajectory yields no descriptions") {
    SocialPartner sp;
    Obs o = ObsBuilder().build();
    CHECK(sp.describe_ids(o, o).empty());
    for (int g = 0; g < 51; ++g) CHECK(sp.oracle_reward(o, o, g) == 0);
  }

  TEST_CASE("an attached magnet lifted by the stick reads as grasped and shifted") {
    SocialPartner sp;
    Obs initial = ObsBuilder().build();
    // magnet rides the magnetic stick tip, well above its initial height
    Vec2 tip{-1.22, 0.41 + 0.5};
    Obs final = ObsBuilder()
                    .set(obs_slot::tip1, tip)
                    .set(obs_slot::object1, tip)
                    .build();
    auto ids = sp.describe_ids(initial, final);
    CHECK(contains(ids, 31));  // Grasp the magnet
    CHECK(contains(ids, 35));  // Shift the magnet higher
  }

  TEST_CASE("grasp detection keys on handle/gripper coincidence") {
    SocialPartner sp;
    Obs initial = ObsBuilder().build();
    Vec2 grip{0.4, 0.3};
    Obs final = ObsBuilder().set(obs_slot::gripper, grip).set(obs_slot::handle1, grip).build();
    CHECK(sp.oracle_reward(initial, final, 9) == 1);
    CHECK(sp.oracle_reward(initial, final, 10) == 0);

    Obs near_miss =
        ObsBuilder().set(obs_slot::gripper, grip).set(obs_slot::handle1, grip + Vec2{1e-6, 0}).build();
    CHECK(sp.oracle_reward(initial, near_miss, 9) == 0);
  }

  TEST_CASE("bring-closer needs a strict approach beyond the threshold") {
    SocialPartner sp;
    Obs initial = ObsBuilder().build();  // tip1 to object1 distance ~0.2247
    Obs close = ObsBuilder().set(obs_slot::tip1, {-1.11, 0.59}).build();
    CHECK(sp.oracle_reward(initial, close, 29) == 1);
    Obs slight = ObsBuilder().set(obs_slot::tip1, {-1.20, 0.45}).build();
    CHECK(sp.oracle_reward(initial, slight, 29) == 0);
  }

  TEST_CASE("area predicates demand both margins plus displacement") {
    SocialPartner sp;
    Obs initial = ObsBuilder().build();
    SUBCASE("top right works") {
      Obs final = ObsBuilder().set(obs_slot::gripper, {0.5, 0.5}).build();
      CHECK(sp.oracle_reward(initial, final, 5) == 1);
      CHECK(sp.oracle_reward(initial, final, 6) == 0);
    }
    SUBCASE("margin failures reject") {
      Obs final = ObsBuilder().set(obs_slot::gripper, {0.5, 0.2}).build();
      CHECK(sp.oracle_reward(initial, final, 5) == 0);
    }
    SUBCASE("no displacement rejects") {
      Obs both = ObsBuilder().set(obs_slot::gripper, {0.5, 0.5}).build();
      CHECK(sp.oracle_reward(both, both, 5) == 0);
    }
  }

  TEST_CASE("center predicate needs proximity and displacement") {
    SocialPartner sp;
    Obs initial = ObsBuilder().build();
    Obs final = ObsBuilder().set(obs_slot::gripper, {0.1, 0.1}).build();
    CHECK(sp.oracle_reward(initial, final, 4) == 1);
    CHECK(sp.oracle_reward(final, final, 4) == 0);  // no displacement
  }

  TEST_CASE("oracle_reward rejects out-of-range goal ids") {
    SocialPartner sp;
    Obs o = ObsBuilder().build();
    CHECK_THROWS_AS(sp.oracle_reward(o, o, -1), std::out_of_range);
    CHECK_THROWS_AS(sp.oracle_reward(o, o, 51), std::out_of_range);
  }

  TEST_CASE("describe and oracle_reward agree on random pairs") {
    SocialPartner sp;
    RngStream rng(2024);
    for (int trial = 0; trial < 2000; ++trial) {
      Obs a = random_obs(rng), b = random_obs(rng);
      auto ids = sp.describe_ids(a, b);
      std::set<int> set(ids.begin(), ids.end());
      for (int g = 0; g < 51; ++g)
        REQUIRE(sp.oracle_reward(a, b, g) == (set.count(g) ? 1 : 0));
    }
  }

  TEST_CASE("shift monotonicity and left/right exclusion") {
    SocialPartner sp;
    RngStream rng(7);
    for (int trial = 0; trial < 500; ++trial) {
      Obs a = random_obs(rng), b = random_obs(rng);
      bool right = sp.oracle_reward(a, b, 0) == 1;
      bool left = sp.oracle_reward(a, b, 1) == 1;
      CHECK_FALSE((right && left));
      if (right) {
        Obs further = b;
        further[obs_slot::gripper] += rng.uniform(0.0, 2.0);
        CHECK(sp.oracle_reward(a, further, 0) == 1);
      }
    }
  }

  TEST_CASE("goal subset restricts describe but not the oracle") {
    std::vector<int> subset{0, 1, 2, 3, 4, 5, 6, 7, 8};
    SocialPartner sp(SpThresholds{}, subset);
    RngStream rng(55);
    for (int trial = 0; trial < 300; ++trial) {
      Obs a = random_obs(rng), b = random_obs(rng);
      for (int id : sp.describe_ids(a, b)) CHECK(id <= 8);
    }
    Obs initial = ObsBuilder().build();
    Vec2 grip{0.4, 0.3};
    Obs final = ObsBuilder().set(obs_slot::gripper, grip).set(obs_slot::handle1, grip).build();
    CHECK(sp.oracle_reward(initial, final, 9) == 1);  // oracle still answers
    CHECK_FALSE(contains(sp.describe_ids(initial, final), 9));
  }

  TEST_CASE("catalog json export lists all ids") {
    auto text = SocialPartner::catalog_json();
    CHECK(text.find("\"Grasp the magnetic stick\"") != std::string::npos);
    CHECK(text.find("\"id\": 50") != std::string::npos);
  }
}
