#include "le2/env.hpp"

#include <cmath>

namespace le2 {
namespace {

double wrap_pi(double a) {
  // remainder() lands in [-pi, pi] with round-half-to-even at the boundary
  return std::remainder(a, 2.0 * kPi);
}

}  // namespace

void EnvConfig::validate() const {
  for (double l : link_lengths)
    if (!(l > 0.0)) throw ConfigError("env: link lengths must be positive");
  if (!(stick_length > 0.0)) throw ConfigError("env: stick_length must be positive");
  if (!(grab_radius > 0.0) || !(attach_radius > 0.0))
    throw ConfigError("env: grab/attach radii must be positive");
  if (!(max_joint_step > 0.0)) throw ConfigError("env: max_joint_step must be positive");
  if (episode_length <= 0 || episode_length >= 65536)
    throw ConfigError("env: episode_length must be in [1, 65535]");
  for (const Vec2& obj : object_init) {
    double d = norm(obj);
    if (!(d > arm_reach()))
      throw ConfigError("env: objects must lie strictly outside bare-arm reach");
    if (!(d <= tool_reach()))
      throw ConfigError("env: objects must be reachable with a stick in hand");
  }
}

ArmToolsToys::ArmToolsToys(EnvConfig cfg) : cfg_(cfg) { cfg_.validate(); }

Vec2 ArmToolsToys::forward_kinematics(const std::array<double, 3>& joints) const {
  Vec2 p{0.0, 0.0};
  double angle = 0.0;
  for (int k = 0; k < 3; ++k) {
    angle += joints[k];
    p = p + cfg_.link_lengths[k] * Vec2{std::cos(angle), std::sin(angle)};
  }
  return p;
}

WorldState ArmToolsToys::initial_state() const {
  WorldState s;
  for (int i = 0; i < 3; ++i) s.joints[i] = wrap_pi(cfg_.initial_joints[i]);
  for (int j = 0; j < 2; ++j) {
    s.handle[j] = cfg_.handle_init[j];
    s.tip[j] = s.handle[j] + cfg_.stick_length * Vec2{std::cos(cfg_.tip_angle_init[j]),
                                                      std::sin(cfg_.tip_angle_init[j])};
    s.object[j] = cfg_.object_init[j];
  }
  return s;
}

WorldState ArmToolsToys::step(const WorldState& s, const Action& a) const {
  WorldState n = s;
  for (int i = 0; i < 3; ++i)
    n.joints[i] = wrap_pi(s.joints[i] + clamp_unit(a[i]) * cfg_.max_joint_step);
  n.gripper_closed = a[3] > 0.0;

  Vec2 grip = forward_kinematics(n.joints);

  // A held stick is released in place when the gripper opens: it keeps the pose
  // it had before this step's arm motion.
  if (s.held != Held::none && !n.gripper_closed) n.held = Held::none;

  // Grabbing is edge triggered (open -> closed) at the new gripper position.
  if (!s.gripper_closed && n.gripper_closed && s.held == Held::none) {
    double d[2] = {dist(grip, n.handle[0]), dist(grip, n.handle[1])};
    int pick = -1;
    if (d[0] < cfg_.grab_radius) pick = 0;
    if (d[1] < cfg_.grab_radius && (pick == -1 || d[1] < d[0])) pick = 1;
    // equal distances fall through to stick1
    if (pick == 0) n.held = Held::stick1;
    if (pick == 1) n.held = Held::stick2;
  }

  if (n.held != Held::none) {
    int k = n.held == Held::stick1 ? 0 : 1;
    double dir = n.joints[0] + n.joints[1] + n.joints[2];
    n.handle[k] = grip;
    n.tip[k] = grip + cfg_.stick_length * Vec2{std::cos(dir), std::sin(dir)};
  }

  for (int j = 0; j < 2; ++j) {
    if (!n.attached[j] && dist(n.tip[j], n.object[j]) < cfg_.attach_radius)
      n.attached[j] = true;  // permanent for the rest of the episode
    if (n.attached[j]) n.object[j] = n.tip[j];
  }
  return n;
}

Obs ArmToolsToys::observe(const WorldState& s, const ArmToolsToys& env) {
  Obs o{};
  o[0] = s.joints[0];
  o[1] = s.joints[1];
  o[2] = s.joints[2];
  set_obs_vec(o, obs_slot::gripper, env.forward_kinematics(s.joints));
  set_obs_vec(o, obs_slot::handle1, s.handle[0]);
  set_obs_vec(o, obs_slot::handle2, s.handle[1]);
  set_obs_vec(o, obs_slot::tip1, s.tip[0]);
  set_obs_vec(o, obs_slot::tip2, s.tip[1]);
  set_obs_vec(o, obs_slot::object1, s.object[0]);
  set_obs_vec(o, obs_slot::object2, s.object[1]);
  return o;
}

}  // namespace le2
