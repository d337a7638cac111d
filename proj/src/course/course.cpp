#include "qclab/course/course.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace qclab::course {

using sim::Box;

namespace {
constexpr double kRangeTolerance = 1e-12;
}

bool DifficultyRange::contains(double l) const {
  return l >= std::min(easy, hard) - kRangeTolerance && l <= std::max(easy, hard) + kRangeTolerance;
}

DifficultyRange train_range(ObstacleKind kind) {
  switch (kind) {
    case ObstacleKind::Flat: return {0.0, 0.0};
    case ObstacleKind::Highland: return {0.05, 0.55};
    case ObstacleKind::Barrier: return {0.31, 0.00};
    case ObstacleKind::Tunnel: return {0.40, 0.25};
    case ObstacleKind::Crack: return {0.38, 0.28};
  }
  throw std::invalid_argument("train_range: bad kind");
}

DifficultyRange test_range(ObstacleKind kind) {
  switch (kind) {
    case ObstacleKind::Flat: return {0.0, 0.0};
    case ObstacleKind::Highland: return {0.25, 0.55};
    case ObstacleKind::Barrier: return {0.16, 0.00};
    case ObstacleKind::Tunnel: return {0.38, 0.25};
    case ObstacleKind::Crack: return {0.32, 0.28};
  }
  throw std::invalid_argument("test_range: bad kind");
}

ObstacleSet build_obstacle(ObstacleKind kind, double l, std::uint64_t seed, const CourseGeometry& g) {
  if (!train_range(kind).contains(l)) {
    throw std::invalid_argument("build_obstacle: l = " + std::to_string(l) + " outside the " +
                                std::string(sim::kind_name(kind)) + " range");
  }
  ObstacleSet set;
  set.kind = kind;
  set.difficulty_param = l;

  const double half_w = 0.5 * g.lane_width;
  const double y_edge = half_w + g.apron;
  const double x_lo = -2.0;
  const double x_hi = g.lane_length + 2.0;
  const double x0 = g.obstacle_start_x;

  set.boxes.push_back({Vec3(x_lo, -y_edge, -1.0), Vec3(x_hi, y_edge, 0.0), true});

  switch (kind) {
    case ObstacleKind::Flat: break;
    case ObstacleKind::Highland:
      // climbable step from the obstacle line to the end of the ground
      set.boxes.push_back({Vec3(x0, -y_edge, 0.0), Vec3(x_hi, y_edge, l), false});
      break;
    case ObstacleKind::Barrier: {
      // wall covering one side, leaving a passage of width l at the lane edge
      // plus the apron on the open side
      const bool block_left = (seed & 1u) != 0;
      const double width = g.lane_width - l;
      if (width > 0.0) {
        Box b;
        if (block_left) {
          b = {Vec3(x0, half_w - width, 0.0), Vec3(x0 + g.barrier_depth, y_edge, g.wall_height), false};
        } else {
          b = {Vec3(x0, -y_edge, 0.0), Vec3(x0 + g.barrier_depth, -half_w + width, g.wall_height), false};
        }
        set.boxes.push_back(b);
      }
      break;
    }
    case ObstacleKind::Tunnel:
      set.boxes.push_back(
          {Vec3(x0, -y_edge, l), Vec3(x0 + g.obstacle_depth, y_edge, l + g.ceiling_thickness), false});
      break;
    case ObstacleKind::Crack:
      set.boxes.push_back(
          {Vec3(x0, -y_edge, 0.0), Vec3(x0 + g.obstacle_depth, -0.5 * l, g.wall_height), false});
      set.boxes.push_back({Vec3(x0, 0.5 * l, 0.0), Vec3(x0 + g.obstacle_depth, y_edge, g.wall_height), false});
      break;
  }
  set.validate();
  return set;
}

ObstacleSet build_obstacle(const CourseSpec& spec, std::uint64_t seed) {
  if (!(spec.difficulty >= 0.0 && spec.difficulty <= 1.0))
    throw std::invalid_argument("build_obstacle: difficulty outside [0, 1]");
  return build_obstacle(spec.kind, spec.l(), seed, spec.geometry);
}

}  // namespace qclab::course
