#include "qclab/task/scripted.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qclab::task {

JointVector TrotGait::action(double t) const {
  JointVector a = JointVector::Zero();
  for (int leg = 0; leg < kNumLegs; ++leg) {
    const bool pair_a = leg == 0 || leg == 3;
    const double p = 2.0 * std::numbers::pi * frequency * t + (pair_a ? 0.0 : std::numbers::pi);
    a[joint_index(leg, LinkPart::Hip)] = is_left(leg) ? hip : -hip;
    a[joint_index(leg, LinkPart::Thigh)] = thigh * std::sin(p);
    a[joint_index(leg, LinkPart::Calf)] = -calf * std::max(0.0, std::sin(p + calf_phase));
  }
  return a;
}

TrotGait TrotGait::sample(Rng& rng) {
  TrotGait g;
  g.frequency = rng.uniform(2.0, 3.5);
  g.thigh = rng.uniform(0.3, 1.0);
  g.calf = rng.uniform(0.5, 1.0);
  g.calf_phase = rng.uniform(-2.6, -1.4);
  g.hip = rng.uniform(-0.4, 0.4);
  return g;
}

}  // namespace qclab::task
