#pragma once

#include <array>
#include <cstdint>

#include "le2/types.hpp"

namespace le2 {

// 2D arm-tools-toys world: a 3-joint planar arm with a gripper, two grabbable
// sticks, and two objects that attach to the matching stick tip. Episodes have
// fixed length; dynamics are deterministic.
struct EnvConfig {
  std::array<double, 3> link_lengths{0.5, 0.3, 0.2};
  double stick_length = 0.5;
  double grab_radius = 0.1;
  double attach_radius = 0.1;
  double max_joint_step = kPi / 8.0;
  int episode_length = 50;

  // Initial layout. Tip angles default to "pointing away from the base".
  std::array<double, 3> initial_joints{0.0, 0.0, 0.0};
  std::array<Vec2, 2> handle_init{{{-0.75, 0.25}, {0.75, 0.25}}};
  std::array<double, 2> tip_angle_init{std::atan2(0.25, -0.75), std::atan2(0.25, 0.75)};
  std::array<Vec2, 2> object_init{{{-1.1, 0.6}, {1.1, 0.6}}};

  double arm_reach() const { return link_lengths[0] + link_lengths[1] + link_lengths[2]; }
  double tool_reach() const { return arm_reach() + stick_length; }

  // Throws ConfigError if lengths/radii are not positive or the objects are not
  // strictly outside arm reach yet within tool reach.
  void validate() const;
};

enum class Held : uint8_t { none = 0, stick1 = 1, stick2 = 2 };

struct WorldState {
  std::array<double, 3> joints{0.0, 0.0, 0.0};
  bool gripper_closed = false;
  Held held = Held::none;
  std::array<Vec2, 2> handle{};
  std::array<Vec2, 2> tip{};
  std::array<bool, 2> attached{false, false};
  std::array<Vec2, 2> object{};
};

class ArmToolsToys {
 public:
  ArmToolsToys() : ArmToolsToys(EnvConfig{}) {}
  explicit ArmToolsToys(EnvConfig cfg);

  const EnvConfig& config() const { return cfg_; }

  WorldState initial_state() const;
  Obs reset() const { return observe(initial_state()); }

  // Pure transition. Action components are clamped to [-1, 1]; joints wrap to
  // [-pi, pi]. Order within a step: joints move, gripper state applies,
  // grab/release resolve, the held stick tracks the gripper, attachments
  // resolve and attached objects track their tip.
  WorldState step(const WorldState& s, const Action& a) const;

  // Planar chain from base (0,0); zero pose points along +x.
  Vec2 forward_kinematics(const std::array<double, 3>& joints) const;

  static Obs observe(const WorldState& s, const ArmToolsToys& env);
  Obs observe(const WorldState& s) const { return observe(s, *this); }

 private:
  EnvConfig cfg_;
};

}  // namespace le2
