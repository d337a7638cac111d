#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qclab/nn/network.hpp"

namespace qclab::est {

// (history, collision flags) pairs for the collision estimator.
// File layout: "QCDS" | u32 version | u32 history | u32 obs dim | u32 flags |
// u64 count | count records of [history * obs dim float32, flags uint8, kind uint8].
// After append() the matrices may carry spare columns past size();
// shrink_to_fit() trims them.
struct CollisionDataset {
  int history = 10;
  nn::Matrix histories;  // history * 45 x N, oldest frame first
  nn::Matrix labels;     // 17 x N, 0/1
  std::vector<std::uint8_t> kinds;

  std::size_t size() const { return kinds.size(); }
  void reserve(std::size_t n);
  void shrink_to_fit();
  void append(const nn::Matrix& hist, const nn::Matrix& lab, const std::vector<std::uint8_t>& kind);

  // Same records keeping only the newest `k` frames.
  CollisionDataset with_history(int k) const;

  void save(const std::string& path) const;
  static CollisionDataset load(const std::string& path);
};

}  // namespace qclab::est
