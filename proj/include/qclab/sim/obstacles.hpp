#pragma once

#include <string_view>
#include <vector>

#include "qclab/common/types.hpp"

namespace qclab::sim {

enum class ObstacleKind : int { Flat = 0, Highland = 1, Barrier = 2, Tunnel = 3, Crack = 4 };

inline constexpr int kNumObstacleKinds = 5;

std::string_view kind_name(ObstacleKind kind);
ObstacleKind kind_from_name(std::string_view name);

// Axis-aligned box in world coordinates.
struct Box {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();
  bool ground = false;

  Vec3 center() const { return 0.5 * (min + max); }
  Vec3 half_extents() const { return 0.5 * (max - min); }
  bool contains(const Vec3& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
  bool degenerate() const { return !((max.array() > min.array()).all()); }
};

// Signed distance from `p` to the box surface (negative inside). Convex in p.
double box_sdf(const Box& box, const Vec3& p);

// Outward unit normal of the nearest box face or feature at p.
Vec3 box_sdf_gradient(const Box& box, const Vec3& p);

struct ObstacleSet {
  std::vector<Box> boxes;
  ObstacleKind kind = ObstacleKind::Flat;
  double difficulty_param = 0.0;

  // Height of the highest walkable top surface under (x, y) not above `below_z`.
  double terrain_height(double x, double y, double below_z) const;

  // Throws std::invalid_argument when the set violates its invariants.
  void validate() const;
};

}  // namespace qclab::sim
