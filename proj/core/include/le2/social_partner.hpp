#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "le2/types.hpp"

namespace le2 {

enum class Entity : uint8_t { hand, magnetic_stick, sticky_stick, magnet, scratch };

enum class PredicateKind : uint8_t {
  shift_right,
  shift_left,
  shift_higher,
  shift_lower,
  move_center,
  move_area,
  grasp_stick,
  grasp_object,
  bring_closer,
};

enum class Quadrant : uint8_t { top_right, top_left, bottom_right, bottom_left };

struct PredicateSpec {
  Entity entity = Entity::hand;
  PredicateKind kind = PredicateKind::shift_right;
  Quadrant quadrant = Quadrant::top_right;  // used by move_area only
};

struct CatalogEntry {
  int id = 0;
  std::string description;
  PredicateSpec predicate;
};

struct SpThresholds {
  double shift_delta = 0.1;
  double area_margin = 0.25;
  double center_radius = 0.25;
  double closer_delta = 0.1;
  double move_epsilon = 0.05;
  double grasp_tol = 1e-9;

  void validate() const;
};

// The fixed 51-description catalog, in catalog order.
const std::vector<CatalogEntry>& goal_catalog();

// Scripted descriptive oracle. Pure function of (initial, final) observation
// pairs; doubles as the ground-truth reward for offline evaluation. An optional
// subset restricts which descriptions it ever emits (oracle_reward stays
// unrestricted: it is the evaluation ground truth).
class SocialPartner {
 public:
  explicit SocialPartner(SpThresholds thresholds = {},
                         std::optional<std::vector<int>> goal_subset = std::nullopt);

  std::vector<int> describe_ids(const Obs& initial, const Obs& final) const;
  std::vector<std::string> describe(const Obs& initial, const Obs& final) const;

  // 1 iff catalog()[goal_id] would be in the unrestricted describe(initial, final).
  // Throws std::out_of_range on an invalid goal id.
  int oracle_reward(const Obs& initial, const Obs& final, int goal_id) const;

  const SpThresholds& thresholds() const { return thresholds_; }
  const std::optional<std::vector<int>>& goal_subset() const { return subset_; }

  // JSON catalog export: [{"id": ..., "description": ...}, ...]
  static std::string catalog_json();

 private:
  bool holds(const PredicateSpec& p, const Obs& initial, const Obs& final) const;

  SpThresholds thresholds_;
  std::optional<std::vector<int>> subset_;
  std::array<bool, kCatalogSize> emit_mask_{};
};

}  // namespace le2
