#include "qclab/est/dataset.hpp"

#include <bit>
#include <cstring>
#include <stdexcept>

#include "qclab/common/binary_io.hpp"
#include "qclab/common/types.hpp"

namespace qclab::est {

namespace {
constexpr std::uint32_t kDatasetVersion = 1;
}

void CollisionDataset::reserve(std::size_t n) {
  const std::size_t cur = size();
  nn::Matrix h(history * kObsDim, static_cast<Eigen::Index>(n));
  nn::Matrix l(kNumFlags, static_cast<Eigen::Index>(n));
  if (cur > 0) {
    h.leftCols(cur) = histories.leftCols(cur);
    l.leftCols(cur) = labels.leftCols(cur);
  }
  histories = std::move(h);
  labels = std::move(l);
  kinds.reserve(n);
}

void CollisionDataset::shrink_to_fit() {
  const auto n = static_cast<Eigen::Index>(size());
  if (histories.cols() == n) return;
  histories = nn::Matrix(histories.leftCols(n));
  labels = nn::Matrix(labels.leftCols(n));
}

void CollisionDataset::append(const nn::Matrix& hist, const nn::Matrix& lab, const std::vector<std::uint8_t>& kind) {
  if (hist.rows() != history * kObsDim || lab.rows() != kNumFlags || hist.cols() != lab.cols() ||
      static_cast<std::size_t>(hist.cols()) != kind.size())
    throw std::invalid_argument("CollisionDataset::append: shape mismatch");
  const std::size_t n = size(), add = kind.size();
  if (static_cast<std::size_t>(histories.cols()) < n + add) reserve(std::max<std::size_t>(2 * (n + add), 1024));
  histories.middleCols(n, add) = hist;
  labels.middleCols(n, add) = lab;
  kinds.insert(kinds.end(), kind.begin(), kind.end());
}

CollisionDataset CollisionDataset::with_history(int k) const {
  if (k < 1 || k > history) throw std::invalid_argument("with_history: bad length");
  CollisionDataset out;
  out.history = k;
  const auto n = static_cast<Eigen::Index>(size());
  out.histories = histories.block((history - k) * kObsDim, 0, k * kObsDim, n);
  out.labels = labels.leftCols(n);
  out.kinds = kinds;
  return out;
}

void CollisionDataset::save(const std::string& path) const {
  BinaryWriter w;
  w.raw("QCDS");
  w.u32(kDatasetVersion);
  w.u32(static_cast<std::uint32_t>(history));
  w.u32(kObsDim);
  w.u32(kNumFlags);
  w.u64(size());
  const Eigen::Index rows = history * kObsDim;
  for (std::size_t i = 0; i < size(); ++i) {
    for (Eigen::Index r = 0; r < rows; ++r) w.u32(std::bit_cast<std::uint32_t>(static_cast<float>(histories(r, i))));
    for (int f = 0; f < kNumFlags; ++f) w.u8(labels(f, i) != 0.0 ? 1 : 0);
    w.u8(kinds[i]);
  }
  write_file_atomic(path, w.bytes());
}

CollisionDataset CollisionDataset::load(const std::string& path) {
  const std::string bytes = read_file(path);
  BinaryReader r(bytes);
  try {
    if (r.raw(4) != "QCDS") throw std::runtime_error("not a dataset file: " + path);
    if (r.u32() != kDatasetVersion) throw std::runtime_error("unsupported dataset version: " + path);
    CollisionDataset d;
    d.history = static_cast<int>(r.u32());
    if (r.u32() != static_cast<std::uint32_t>(kObsDim) || r.u32() != static_cast<std::uint32_t>(kNumFlags))
      throw std::runtime_error("dataset layout mismatch: " + path);
    const std::uint64_t n = r.u64();
    const Eigen::Index rows = d.history * kObsDim;
    if (n * (rows * 4 + kNumFlags + 1) != r.remaining()) throw std::runtime_error("dataset size mismatch: " + path);
    d.histories.resize(rows, static_cast<Eigen::Index>(n));
    d.labels.resize(kNumFlags, static_cast<Eigen::Index>(n));
    d.kinds.resize(n);
    for (std::uint64_t i = 0; i < n; ++i) {
      for (Eigen::Index row = 0; row < rows; ++row) d.histories(row, i) = std::bit_cast<float>(r.u32());
      for (int f = 0; f < kNumFlags; ++f) d.labels(f, i) = r.u8();
      d.kinds[i] = r.u8();
    }
    return d;
  } catch (const TruncatedInput&) {
    throw std::runtime_error("truncated dataset file: " + path);
  }
}

}  // namespace qclab::est
