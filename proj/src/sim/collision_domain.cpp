#include "qclab/sim/collision_domain.hpp"

#include <cmath>
#include <vector>

namespace qclab::sim {

int CollisionDomainGrid::count() const {
  int n = 0;
  for (auto c : occupancy) n += c;
  return n;
}

double base_yaw(const Quat& q) {
  const Vec3 x = q * Vec3::UnitX();
  return std::atan2(x.y(), x.x());
}

Vec3 cell_world_position(const RobotState& state, int ix, int iy, int iz) {
  const Eigen::AngleAxisd yaw(base_yaw(state.base_orientation), Vec3::UnitZ());
  return state.base_position + yaw * CollisionDomainGrid::cell_center(ix, iy, iz);
}

CollisionDomainGrid sample_collision_domain(const RobotState& state, const ObstacleSet& obstacles) {
  CollisionDomainGrid grid;
  const Mat3 yaw = Eigen::AngleAxisd(base_yaw(state.base_orientation), Vec3::UnitZ()).toRotationMatrix();

  // Only boxes overlapping the domain's bounding sphere can mark cells.
  const double reach = 0.5 * Vec3(CollisionDomainGrid::kLength, CollisionDomainGrid::kWidth,
                                   CollisionDomainGrid::kHeight)
                                 .norm();
  std::vector<const Box*> near;
  for (const Box& b : obstacles.boxes) {
    if (b.ground) continue;
    const Vec3 closest = state.base_position.cwiseMax(b.min).cwiseMin(b.max);
    if ((closest - state.base_position).norm() > reach) continue;
    near.push_back(&b);
  }
  if (near.empty()) return grid;

  for (int iz = 0; iz < CollisionDomainGrid::kNz; ++iz)
    for (int iy = 0; iy < CollisionDomainGrid::kNy; ++iy)
      for (int ix = 0; ix < CollisionDomainGrid::kNx; ++ix) {
        const Vec3 p = state.base_position + yaw * CollisionDomainGrid::cell_center(ix, iy, iz);
        for (const Box* b : near) {
          if (b->contains(p)) {
            grid.occupancy[CollisionDomainGrid::index(ix, iy, iz)] = 1;
            break;
          }
        }
      }
  return grid;
}

}  // namespace qclab::sim
