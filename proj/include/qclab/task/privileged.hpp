#pragma once

#include "qclab/common/rng.hpp"
#include "qclab/common/types.hpp"
#include "qclab/sim/robot.hpp"

namespace qclab::task {

using PrivilegedVector = Eigen::Matrix<double, kPrivDim, 1>;

// g_t: payload mass offset, CoM offset, friction, per-joint motor strength.
struct PrivilegedInfo {
  double mass_offset = 0.0;
  Vec3 com_offset = Vec3::Zero();
  double friction = 0.7;
  JointVector motor_strength = JointVector::Ones();

  PrivilegedVector to_vector() const;
  sim::DynamicsParams dynamics() const;
};

struct RandomizationRanges {
  bool enabled = true;
  double mass_offset_min = -1.0;
  double mass_offset_max = 2.0;
  double com_offset = 0.05;
  double friction_min = 0.4;
  double friction_max = 1.0;
  double motor_strength_min = 0.8;
  double motor_strength_max = 1.2;
};

// Sampled once per episode; nominal values when randomization is disabled.
PrivilegedInfo assemble_privileged(const RandomizationRanges& ranges, Rng& rng);

bool within_ranges(const PrivilegedInfo& info, const RandomizationRanges& ranges);

}  // namespace qclab::task
