#pragma once

#include <cmath>

namespace teamsim {

// Arena coordinates: center at the origin, y up, units are pixels.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  constexpr Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
  constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return {a.x * s, a.y * s}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return {a.x * s, a.y * s}; }
  friend constexpr bool operator==(Vec2 a, Vec2 b) = default;
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
constexpr double norm_sq(Vec2 a) { return dot(a, a); }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

// Absolute tolerance for geometric comparisons, in pixels.
inline constexpr double kGeometryTolerance = 1e-9;

struct Arena {
  double radius = 400.0;

  bool contains(Vec2 p) const { return norm(p) <= radius + kGeometryTolerance; }
};

struct InterceptSolution {
  double time = 0.0;
  Vec2 point;
  bool reachable = false;
};

// Earliest time at which a pursuer moving at constant `pursuer_speed` can meet a
// target moving with constant velocity. Requires pursuer_speed > |target_vel|;
// throws std::domain_error("unsolvable pursuit") otherwise.
InterceptSolution solve_interception(Vec2 pursuer_pos, double pursuer_speed, Vec2 target_pos,
                                     Vec2 target_vel, const Arena& arena);

// Radial projection onto the arena disc.
Vec2 clamp_to_arena(Vec2 point, const Arena& arena);

// Closed-segment intersection; collinear overlap and touching endpoints count.
bool segments_intersect(Vec2 a1, Vec2 a2, Vec2 b1, Vec2 b2);

// Minimum distance between two points moving linearly over t in [0, horizon].
double min_distance_linear(Vec2 rel_pos, Vec2 rel_vel, double horizon);

}  // namespace teamsim
