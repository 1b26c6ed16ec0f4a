#include "le2/social_partner.hpp"

#include <algorithm>
#include <stdexcept>

#include "json.hpp"

namespace le2 {
namespace {

// Observation slot holding each entity's position. Stick predicates read the
// tip (the end that matters for tool use), not the handle.
int entity_slot(Entity e) {
  switch (e) {
    case Entity::hand: return obs_slot::gripper;
    case Entity::magnetic_stick: return obs_slot::tip1;
    case Entity::sticky_stick: return obs_slot::tip2;
    case Entity::magnet: return obs_slot::object1;
    case Entity::scratch: return obs_slot::object2;
  }
  return obs_slot::gripper;
}

std::vector<CatalogEntry> build_catalog() {
  std::vector<CatalogEntry> cat;
  cat.reserve(kCatalogSize);
  auto add = [&cat](std::string desc, Entity e, PredicateKind k,
                    Quadrant q = Quadrant::top_right) {
    cat.push_back({static_cast<int>(cat.size()), std::move(desc), {e, k, q}});
  };
  using E = Entity;
  using K = PredicateKind;
  using Q = Quadrant;

  add("Shift the hand to the right", E::hand, K::shift_right);
  add("Shift the hand to the left", E::hand, K::shift_left);
  add("Shift the hand higher", E::hand, K::shift_higher);
  add("Shift the hand lower", E::hand, K::shift_lower);
  add("Move the hand close to the center", E::hand, K::move_center);
  add("Move the hand to the top right area", E::hand, K::move_area, Q::top_right);
  add("Move the hand to the top left area", E::hand, K::move_area, Q::top_left);
  add("Move the hand to the bottom right area", E::hand, K::move_area, Q::bottom_right);
  add("Move the hand to the bottom left area", E::hand, K::move_area, Q::bottom_left);
  add("Grasp the magnetic stick", E::magnetic_stick, K::grasp_stick);
  add("Grasp the scratch stick", E::sticky_stick, K::grasp_stick);
  add("Shift the magnetic stick to the right", E::magnetic_stick, K::shift_right);
  add("Shift the magnetic stick to the left", E::magnetic_stick, K::shift_left);
  add("Shift the magnetic stick higher", E::magnetic_stick, K::shift_higher);
  add("Shift the magnetic stick lower", E::magnetic_stick, K::shift_lower);
  add("Move the magnetic stick to the center", E::magnetic_stick, K::move_center);
  add("Move the magnetic stick to the top right area", E::magnetic_stick, K::move_area, Q::top_right);
  add("Move the magnetic stick to the top left area", E::magnetic_stick, K::move_area, Q::top_left);
  add("Move the magnetic stick to the bottom right area", E::magnetic_stick, K::move_area, Q::bottom_right);
  add("Move the magnetic stick to the bottom left area", E::magnetic_stick, K::move_area, Q::bottom_left);
  add("Shift the sticky stick to the right", E::sticky_stick, K::shift_right);
  add("Shift the sticky stick to the left", E::sticky_stick, K::shift_left);
  add("Shift the sticky stick higher", E::sticky_stick, K::shift_higher);
  add("Shift the sticky stick lower", E::sticky_stick, K::shift_lower);
  add("Move the sticky stick to the center", E::sticky_stick, K::move_center);
  add("Move the sticky stick to the top right area", E::sticky_stick, K::move_area, Q::top_right);
  add("Move the sticky stick to the top left area", E::sticky_stick, K::move_area, Q::top_left);
  add("Move the sticky stick to the bottom right area", E::sticky_stick, K::move_area, Q::bottom_right);
  add("Move the sticky stick to the bottom left area", E::sticky_stick, K::move_area, Q::bottom_left);
  add("Bring the magnetic stick closer to the magnet", E::magnetic_stick, K::bring_closer);
  add("Bring the scratch stick closer to the scratch", E::sticky_stick, K::bring_closer);
  add("Grasp the magnet", E::magnet, K::grasp_object);
  add("Grasp the scratch", E::scratch, K::grasp_object);
  add("Shift the magnet to the right", E::magnet, K::shift_right);
  add("Shift the magnet to the left", E::magnet, K::shift_left);
  add("Shift the magnet higher", E::magnet, K::shift_higher);
  add("Shift the magnet lower", E::magnet, K::shift_lower);
  add("Move the magnet to the center", E::magnet, K::move_center);
  add("Move the magnet to the top right area", E::magnet, K::move_area, Q::top_right);
  add("Move the magnet to the top left area", E::magnet, K::move_area, Q::top_left);
  add("Move the magnet to the bottom right area", E::magnet, K::move_area, Q::bottom_right);
  add("Move the magnet to the bottom left area", E::magnet, K::move_area, Q::bottom_left);
  add("Shift the scratch to the right", E::scratch, K::shift_right);
  add("Shift the scratch to the left", E::scratch, K::shift_left);
  add("Shift the scratch higher", E::scratch, K::shift_higher);
  add("Shift the scratch lower", E::scratch, K::shift_lower);
  add("Move the scratch to the center", E::scratch, K::move_center);
  add("Move the scratch to the top right area", E::scratch, K::move_area, Q::top_right);
  add("Move the scratch to the top left area", E::scratch, K::move_area, Q::top_left);
  add("Move the scratch to the bottom right area", E::scratch, K::move_area, Q::bottom_right);
  add("Move the scratch to the bottom left area", E::scratch, K::move_area, Q::bottom_left);
  return cat;
}

bool in_quadrant(Vec2 p, Quadrant q, double margin) {
  switch (q) {
    case Quadrant::top_right: return p.x > margin && p.y > margin;
    case Quadrant::top_left: return p.x < -margin && p.y > margin;
    case Quadrant::bottom_right: return p.x > margin && p.y < -margin;
    case Quadrant::bottom_left: return p.x < -margin && p.y < -margin;
  }
  return false;
}

}  // namespace

void SpThresholds::validate() const {
  if (!(shift_delta > 0.0 && area_margin > 0.0 && center_radius > 0.0 && closer_delta > 0.0 &&
        move_epsilon > 0.0 && grasp_tol > 0.0))
    throw ConfigError("social partner: thresholds must be strictly positive");
}

const std::vector<CatalogEntry>& goal_catalog() {
  static const std::vector<CatalogEntry> cat = build_catalog();
  return cat;
}

SocialPartner::SocialPartner(SpThresholds thresholds, std::optional<std::vector<int>> goal_subset)
    : thresholds_(thresholds), subset_(std::move(goal_subset)) {
  thresholds_.validate();
  if (subset_) {
    for (int id : *subset_)
      if (id < 0 || id >= kCatalogSize)
        throw ConfigError("social partner: goal_subset id out of range: " + std::to_string(id));
    for (int id : *subset_) emit_mask_[id] = true;
  } else {
    emit_mask_.fill(true);
  }
}

bool SocialPartner::holds(const PredicateSpec& p, const Obs& initial, const Obs& final) const {
  const SpThresholds& t = thresholds_;
  Vec2 p0 = obs_vec(initial, entity_slot(p.entity));
  Vec2 pf = obs_vec(final, entity_slot(p.entity));
  switch (p.kind) {
    case PredicateKind::shift_right: return pf.x - p0.x > t.shift_delta;
    case PredicateKind::shift_left: return p0.x - pf.x > t.shift_delta;
    case PredicateKind::shift_higher: return pf.y - p0.y > t.shift_delta;
    case PredicateKind::shift_lower: return p0.y - pf.y > t.shift_delta;
    case PredicateKind::move_center:
      return norm(pf) < t.center_radius && dist(pf, p0) > t.move_epsilon;
    case PredicateKind::move_area:
      return in_quadrant(pf, p.quadrant, t.area_margin) && dist(pf, p0) > t.move_epsilon;
    case PredicateKind::grasp_stick: {
      int handle = p.entity == Entity::magnetic_stick ? obs_slot::handle1 : obs_slot::handle2;
      return dist(obs_vec(final, handle), obs_vec(final, obs_slot::gripper)) < t.grasp_tol;
    }
    case PredicateKind::grasp_object: {
      int tip = p.entity == Entity::magnet ? obs_slot::tip1 : obs_slot::tip2;
      int obj = p.entity == Entity::magnet ? obs_slot::object1 : obs_slot::object2;
      return dist(obs_vec(final, tip), obs_vec(final, obj)) < t.grasp_tol;
    }
    case PredicateKind::bring_closer: {
      int tip = p.entity == Entity::magnetic_stick ? obs_slot::tip1 : obs_slot::tip2;
      int obj = p.entity == Entity::magnetic_stick ? obs_slot::object1 : obs_slot::object2;
      double d0 = dist(obs_vec(initial, tip), obs_vec(initial, obj));
      double df = dist(obs_vec(final, tip), obs_vec(final, obj));
      return df < d0 - t.closer_delta;
    }
  }
  return false;
}

std::vector<int> SocialPartner::describe_ids(const Obs& initial, const Obs& final) const {
  std::vector<int> out;
  for (const CatalogEntry& e : goal_catalog()) {
    if (!emit_mask_[e.id]) continue;
    if (holds(e.predicate, initial, final)) out.push_back(e.id);
  }
  return out;
}

std::vector<std::string> SocialPartner::describe(const Obs& initial, const Obs& final) const {
  std::vector<std::string> out;
  for (int id : describe_ids(initial, final)) out.push_back(goal_catalog()[id].description);
  return out;
}

int SocialPartner::oracle_reward(const Obs& initial, const Obs& final, int goal_id) const {
  if (goal_id < 0 || goal_id >= kCatalogSize)
    throw std::out_of_range("oracle_reward: goal_id out of range: " + std::to_string(goal_id));
  return holds(goal_catalog()[goal_id].predicate, initial, final) ? 1 : 0;
}

std::string SocialPartner::catalog_json() {
  nlohmann::json arr = nlohmann::json::array();
  for (const CatalogEntry& e : goal_catalog())
    arr.push_back({{"id", e.id}, {"description", e.description}});
  return arr.dump(2);
}

}  // namespace le2
