#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace le2 {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr int kObsDim = 17;
inline constexpr int kActionDim = 4;
inline constexpr int kCatalogSize = 51;

using Obs = std::array<double, kObsDim>;
using Action = std::array<double, kActionDim>;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }
inline double dist(Vec2 a, Vec2 b) { return norm(a - b); }

// Observation layout: joints (3), then 2D slots in fixed order.
namespace obs_slot {
inline constexpr int joints = 0;
inline constexpr int gripper = 3;
inline constexpr int handle1 = 5;
inline constexpr int handle2 = 7;
inline constexpr int tip1 = 9;
inline constexpr int tip2 = 11;
inline constexpr int object1 = 13;
inline constexpr int object2 = 15;
}  // namespace obs_slot

inline Vec2 obs_vec(const Obs& o, int slot) { return {o[slot], o[slot + 1]}; }
inline void set_obs_vec(Obs& o, int slot, Vec2 v) {
  o[slot] = v.x;
  o[slot + 1] = v.y;
}

inline double clamp_unit(double v) { return v < -1.0 ? -1.0 : (v > 1.0 ? 1.0 : v); }

// Bad run configuration or CLI usage; maps to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Unrecoverable failure mid-run; the orchestrator checkpoints and maps it to exit code 3.
struct RuntimeAbort : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace le2
