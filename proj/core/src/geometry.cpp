#include "teamsim/geometry.hpp"

#include <algorithm>
#include <stdexcept>

namespace teamsim {

InterceptSolution solve_interception(Vec2 pursuer_pos, double pursuer_speed, Vec2 target_pos,
                                     Vec2 target_vel, const Arena& arena) {
  const double speed_gap = pursuer_speed * pursuer_speed - norm_sq(target_vel);
  if (!(speed_gap > 0.0)) {
    throw std::domain_error("unsolvable pursuit");
  }

  // Solve |d + u t| = s t for the nonnegative root of
  // (s^2 - |u|^2) t^2 - 2 (d.u) t - |d|^2 = 0.
  const Vec2 d = target_pos - pursuer_pos;
  const double du = dot(d, target_vel);
  const double dd = norm_sq(d);
  const double root = std::sqrt(du * du + speed_gap * dd);

  double t = 0.0;
  if (dd > 0.0) {
    // Pick the cancellation-free form of the same root.
    t = du >= 0.0 ? (du + root) / speed_gap : dd / (root - du);
  }

  InterceptSolution sol;
  sol.time = t;
  sol.point = target_pos + target_vel * t;
  sol.reachable = arena.contains(sol.point);
  return sol;
}

Vec2 clamp_to_arena(Vec2 point, const Arena& arena) {
  const double len = norm(point);
  // same tolerance as Arena::contains, so a clamped point is left alone
  if (len <= arena.radius + kGeometryTolerance) {
    return point;
  }
  return point * (arena.radius / len);
}

namespace {

int orientation(Vec2 p, Vec2 q, Vec2 r) {
  const double v = cross(q - p, r - p);
  if (std::abs(v) <= kGeometryTolerance) return 0;
  return v > 0.0 ? 1 : -1;
}

bool within_box(Vec2 p, Vec2 q, Vec2 r) {
  // r lies within the bounding box of pq (used only for collinear triples).
  return r.x <= std::max(p.x, q.x) + kGeometryTolerance &&
         r.x >= std::min(p.x, q.x) - kGeometryTolerance &&
         r.y <= std::max(p.y, q.y) + kGeometryTolerance &&
         r.y >= std::min(p.y, q.y) - kGeometryTolerance;
}

}  // namespace

bool segments_intersect(Vec2 a1, Vec2 a2, Vec2 b1, Vec2 b2) {
  const int o1 = orientation(a1, a2, b1);
  const int o2 = orientation(a1, a2, b2);
  const int o3 = orientation(b1, b2, a1);
  const int o4 = orientation(b1, b2, a2);

  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && within_box(a1, a2, b1)) return true;
  if (o2 == 0 && within_box(a1, a2, b2)) return true;
  if (o3 == 0 && within_box(b1, b2, a1)) return true;
  if (o4 == 0 && within_box(b1, b2, a2)) return true;
  return false;
}

double min_distance_linear(Vec2 rel_pos, Vec2 rel_vel, double horizon) {
  const double vv = norm_sq(rel_vel);
  double t = 0.0;
  if (vv > 0.0) {
    t = std::clamp(-dot(rel_pos, rel_vel) / vv, 0.0, std::max(horizon, 0.0));
  }
  return norm(rel_pos + rel_vel * t);
}

}  // namespace teamsim
