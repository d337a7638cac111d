#pragma once

#include "qclab/common/rng.hpp"
#include "qclab/common/types.hpp"

namespace qclab::task {

// Open-loop trot: diagonal pairs (FL, RR) and (FR, RL) half a cycle apart,
// thigh swings sinusoidally and the calf folds during part of each cycle.
struct TrotGait {
  double frequency = 3.0;  // Hz
  double thigh = 1.0;      // action amplitude
  double calf = 1.0;
  double calf_phase = -2.2;  // rad, calf fold relative to the thigh swing
  double hip = 0.0;          // constant hip abduction action (+ spreads outward)

  JointVector action(double t) const;

  // Randomized gait around the defaults, for data collection.
  static TrotGait sample(Rng& rng);
};

}  // namespace qclab::task
