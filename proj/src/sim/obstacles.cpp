#include "qclab/sim/obstacles.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace qclab::sim {

namespace {
constexpr std::array<std::string_view, kNumObstacleKinds> kKindNames = {"flat", "highland", "barrier",
                                                                        "tunnel", "crack"};
}

std::string_view kind_name(ObstacleKind kind) { return kKindNames.at(static_cast<std::size_t>(kind)); }

ObstacleKind kind_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == name) return static_cast<ObstacleKind>(i);
  }
  throw std::invalid_argument("unknown obstacle kind '" + std::string(name) + "'");
}

double box_sdf(const Box& box, const Vec3& p) {
  const Vec3 q = (p - box.center()).cwiseAbs() - box.half_extents();
  const double outside = q.cwiseMax(0.0).norm();
  const double inside = std::min(q.maxCoeff(), 0.0);
  return outside + inside;
}

Vec3 box_sdf_gradient(const Box& box, const Vec3& p) {
  const Vec3 d = p - box.center();
  const Vec3 q = d.cwiseAbs() - box.half_extents();
  Vec3 sign;
  for (int i = 0; i < 3; ++i) sign[i] = d[i] >= 0.0 ? 1.0 : -1.0;
  if (q.maxCoeff() > 0.0) {
    Vec3 g = q.cwiseMax(0.0).cwiseProduct(sign);
    return g.normalized();
  }
  Vec3 g = Vec3::Zero();
  int axis = 0;
  q.maxCoeff(&axis);
  g[axis] = sign[axis];
  return g;
}

double ObstacleSet::terrain_height(double x, double y, double below_z) const {
  double h = -std::numeric_limits<double>::infinity();
  for (const Box& b : boxes) {
    if (x < b.min.x() || x > b.max.x() || y < b.min.y() || y > b.max.y()) continue;
    if (b.max.z() <= below_z) h = std::max(h, b.max.z());
  }
  return h;
}

void ObstacleSet::validate() const {
  int ground = 0;
  for (const Box& b : boxes) {
    if (b.degenerate()) throw std::invalid_argument("obstacle box is degenerate");
    if (b.ground) ++ground;
  }
  if (ground != 1) throw std::invalid_argument("obstacle set must contain exactly one ground box");
}

}  // namespace qclab::sim
