#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "qclab/task/observation.hpp"

namespace qclab::est {

// Ring buffer of the last `length` observations, zero-padded after reset.
class ObservationHistory {
 public:
  explicit ObservationHistory(int length = 10) : length_(length), frames_(length, task::Observation::Zero()) {
    if (length <= 0) throw std::invalid_argument("ObservationHistory: length must be positive");
  }

  int length() const { return length_; }

  void reset() {
    for (auto& f : frames_) f.setZero();
    head_ = 0;
  }

  void push(const task::Observation& o) {
    frames_[head_] = o;
    head_ = (head_ + 1) % length_;
  }

  // age 0 is the newest observation.
  const task::Observation& at(int age) const { return frames_[(head_ - 1 - age + 2 * length_) % length_]; }

  // Writes the newest `steps` observations oldest-first into `out`
  // (steps * kObsDim values).
  void copy_recent(int steps, std::span<double> out) const {
    if (steps > length_ || static_cast<int>(out.size()) < steps * kObsDim)
      throw std::invalid_argument("ObservationHistory::copy_recent: bad size");
    for (int s = 0; s < steps; ++s) {
      const task::Observation& o = at(steps - 1 - s);
      for (int i = 0; i < kObsDim; ++i) out[s * kObsDim + i] = o[i];
    }
  }

  const std::vector<task::Observation>& raw_frames() const { return frames_; }
  int head() const { return head_; }
  void restore(std::vector<task::Observation> frames, int head) {
    if (static_cast<int>(frames.size()) != length_) throw std::invalid_argument("ObservationHistory::restore");
    frames_ = std::move(frames);
    head_ = head;
  }

 private:
  int length_;
  std::vector<task::Observation> frames_;
  int head_ = 0;
};

}  // namespace qclab::est
