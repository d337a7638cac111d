#pragma once

#include <cstdint>
#include <vector>

#include "qclab/common/rng.hpp"
#include "qclab/sim/obstacles.hpp"

namespace qclab::course {

using sim::ObstacleKind;
using sim::ObstacleSet;

// [l_easy, l_hard] interval in meters; l_hard may be below l_easy.
struct DifficultyRange {
  double easy = 0.0;
  double hard = 0.0;

  double at(double difficulty) const { return easy + difficulty * (hard - easy); }
  bool contains(double l) const;
};

DifficultyRange train_range(ObstacleKind kind);
DifficultyRange test_range(ObstacleKind kind);

struct CourseGeometry {
  double lane_length = 6.0;
  double lane_width = 2.0;
  double obstacle_start_x = 2.0;
  double goal_x = 4.0;
  // flat margin beside the lane; obstacles other than barriers span it too
  double apron = 1.0;
  double obstacle_depth = 1.5;   // tunnel and crack length along x
  double barrier_depth = 0.3;
  double wall_height = 1.0;
  double ceiling_thickness = 0.3;
};

struct CourseSpec {
  ObstacleKind kind = ObstacleKind::Flat;
  double difficulty = 0.0;
  CourseGeometry geometry;

  double l() const { return train_range(kind).at(difficulty); }
};

// Builds the obstacle field for `kind` with difficulty parameter `l`.
// Throws std::invalid_argument when l lies outside the kind's train range.
ObstacleSet build_obstacle(ObstacleKind kind, double l, std::uint64_t seed, const CourseGeometry& geometry = {});

ObstacleSet build_obstacle(const CourseSpec& spec, std::uint64_t seed);

}  // namespace qclab::course
