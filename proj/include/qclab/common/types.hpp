#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <array>
#include <cstddef>

namespace qclab {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;

inline constexpr int kNumLegs = 4;
inline constexpr int kNumJoints = 12;
// base, 4 hips, 4 thighs, 4 calves
inline constexpr int kNumLinks = 13;
// 13 links followed by the 4 feet
inline constexpr int kNumFlags = 17;
inline constexpr int kObsDim = 45;
inline constexpr int kPrivDim = 17;

using JointVector = Eigen::Matrix<double, kNumJoints, 1>;
using FlagArray = std::array<bool, kNumFlags>;

// Leg order used everywhere: front-left, front-right, rear-left, rear-right.
enum class Leg : int { FL = 0, FR = 1, RL = 2, RR = 3 };

enum class LinkPart : int { Hip = 0, Thigh = 1, Calf = 2 };

constexpr int joint_index(int leg, LinkPart part) { return leg * 3 + static_cast<int>(part); }

// Link indexing: 0 = base, 1..4 hips, 5..8 thighs, 9..12 calves (leg order within each group).
constexpr int link_index(int leg, LinkPart part) { return 1 + static_cast<int>(part) * kNumLegs + leg; }

constexpr int foot_flag_index(int leg) { return kNumLinks + leg; }

constexpr bool is_left(int leg) { return leg == 0 || leg == 2; }
constexpr bool is_front(int leg) { return leg == 0 || leg == 1; }

}  // namespace qclab
