#include "qclab/task/privileged.hpp"

namespace qclab::task {

PrivilegedVector PrivilegedInfo::to_vector() const {
  PrivilegedVector v;
  v[0] = mass_offset;
  v.segment<3>(1) = com_offset;
  v[4] = friction;
  v.segment<kNumJoints>(5) = motor_strength;
  return v;
}

sim::DynamicsParams PrivilegedInfo::dynamics() const {
  sim::DynamicsParams p;
  p.mass_offset = mass_offset;
  p.com_offset = com_offset;
  p.friction = friction;
  p.motor_strength = motor_strength;
  return p;
}

PrivilegedInfo assemble_privileged(const RandomizationRanges& r, Rng& rng) {
  PrivilegedInfo info;
  if (!r.enabled) return info;
  info.mass_offset = rng.uniform(r.mass_offset_min, r.mass_offset_max);
  for (int i = 0; i < 3; ++i) info.com_offset[i] = rng.uniform(-r.com_offset, r.com_offset);
  info.friction = rng.uniform(r.friction_min, r.friction_max);
  for (int j = 0; j < kNumJoints; ++j) info.motor_strength[j] = rng.uniform(r.motor_strength_min, r.motor_strength_max);
  return info;
}

bool within_ranges(const PrivilegedInfo& info, const RandomizationRanges& r) {
  if (info.mass_offset < r.mass_offset_min || info.mass_offset > r.mass_offset_max) return false;
  if ((info.com_offset.cwiseAbs().array() > r.com_offset).any()) return false;
  if (info.friction < r.friction_min || info.friction > r.friction_max) return false;
  return (info.motor_strength.array() >= r.motor_strength_min).all() &&
         (info.motor_strength.array() <= r.motor_strength_max).all();
}

}  // namespace qclab::task
