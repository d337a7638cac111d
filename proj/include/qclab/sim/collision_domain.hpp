#pragma once

#include <array>
#include <cstdint>

#include "qclab/common/types.hpp"
#include "qclab/sim/obstacles.hpp"
#include "qclab/sim/robot.hpp"

namespace qclab::sim {

// Body-centered, yaw-aligned occupancy grid around the robot.
struct CollisionDomainGrid {
  static constexpr int kNx = 12;
  static constexpr int kNy = 8;
  static constexpr int kNz = 6;
  static constexpr int kCells = kNx * kNy * kNz;
  static constexpr double kLength = 0.90;
  static constexpr double kWidth = 0.40;
  static constexpr double kHeight = 0.50;

  std::array<std::uint8_t, kCells> occupancy{};

  // x varies fastest, then y, then z.
  static constexpr int index(int ix, int iy, int iz) { return (iz * kNy + iy) * kNx + ix; }

  // Cell center in the yaw-aligned body frame.
  static Vec3 cell_center(int ix, int iy, int iz) {
    return {-0.5 * kLength + (ix + 0.5) * kLength / kNx, -0.5 * kWidth + (iy + 0.5) * kWidth / kNy,
            -0.5 * kHeight + (iz + 0.5) * kHeight / kNz};
  }

  bool at(int ix, int iy, int iz) const { return occupancy[index(ix, iy, iz)] != 0; }
  int count() const;
};

// Heading angle of the base about world z.
double base_yaw(const Quat& q);

// World position of a yaw-frame cell center for a robot at `state`.
Vec3 cell_world_position(const RobotState& state, int ix, int iy, int iz);

// A cell is occupied iff its center lies inside a non-ground obstacle box.
CollisionDomainGrid sample_collision_domain(const RobotState& state, const ObstacleSet& obstacles);

}  // namespace qclab::sim
