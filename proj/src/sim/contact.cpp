#include "qclab/sim/contact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace qclab::sim {

Vec3 penalty_force(const ContactParams& params, double friction, double depth, const Vec3& normal,
                   const Vec3& velocity) {
  const double vn = velocity.dot(normal);
  const double fn = std::max(0.0, params.stiffness * depth - params.damping * vn);
  if (fn == 0.0) return Vec3::Zero();
  const Vec3 vt = velocity - vn * normal;
  Vec3 ft = -params.tangential_damping * vt;
  const double cap = friction * fn;
  const double ft_norm = ft.norm();
  if (ft_norm > cap) ft *= cap / ft_norm;
  return fn * normal + ft;
}

PenetrationQuery point_box_penetration(const Vec3& p, const Box& box) {
  PenetrationQuery q;
  const double d = box_sdf(box, p);
  if (d >= 0.0) return q;
  q.hit = true;
  q.depth = -d;
  q.normal = box_sdf_gradient(box, p);
  q.point = p;
  return q;
}

PenetrationQuery capsule_box_penetration(const Capsule& capsule, const Box& box) {
  PenetrationQuery q;
  const Vec3 lo = capsule.a.cwiseMin(capsule.b).array() - capsule.radius;
  const Vec3 hi = capsule.a.cwiseMax(capsule.b).array() + capsule.radius;
  if ((hi.array() < box.min.array()).any() || (lo.array() > box.max.array()).any()) return q;

  // The box signed distance is convex, so its restriction to the segment is
  // convex in t and golden-section search finds the global minimum.
  const Vec3 ab = capsule.b - capsule.a;
  auto f = [&](double t) { return box_sdf(box, capsule.a + t * ab); };
  constexpr double kInvPhi = 0.6180339887498949;
  double lo_t = 0.0, hi_t = 1.0;
  double x1 = hi_t - kInvPhi * (hi_t - lo_t);
  double x2 = lo_t + kInvPhi * (hi_t - lo_t);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 48; ++it) {
    if (f1 <= f2) {
      hi_t = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi_t - kInvPhi * (hi_t - lo_t);
      f1 = f(x1);
    } else {
      lo_t = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo_t + kInvPhi * (hi_t - lo_t);
      f2 = f(x2);
    }
  }
  double t = 0.5 * (lo_t + hi_t);
  double best = f(t);
  // endpoints are not probed by the search itself
  for (double te : {0.0, 1.0}) {
    const double fe = f(te);
    if (fe < best) {
      best = fe;
      t = te;
    }
  }
  const double depth = capsule.radius - best;
  if (depth <= 0.0) return q;
  const Vec3 c = capsule.a + t * ab;
  q.hit = true;
  q.depth = depth;
  q.normal = box_sdf_gradient(box, c);
  q.point = c - capsule.radius * q.normal;
  return q;
}

PenetrationQuery oriented_box_penetration(const OrientedBox& obb, const Box& box) {
  PenetrationQuery q;
  const Vec3 cb = box.center();
  const Vec3 hb = box.half_extents();
  const Vec3 d = cb - obb.center;

  std::vector<Vec3> axes;
  axes.reserve(15);
  for (int i = 0; i < 3; ++i) axes.push_back(obb.rotation.col(i));
  for (int i = 0; i < 3; ++i) axes.push_back(Vec3::Unit(i));
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const Vec3 c = obb.rotation.col(i).cross(Vec3::Unit(j));
      const double n = c.norm();
      if (n > 1e-9) axes.push_back(c / n);
    }
  }

  double best_overlap = std::numeric_limits<double>::infinity();
  Vec3 best_axis = Vec3::UnitZ();
  for (const Vec3& L : axes) {
    double ra = 0.0;
    for (int i = 0; i < 3; ++i) ra += obb.half_extents[i] * std::abs(obb.rotation.col(i).dot(L));
    const double rb = hb.dot(L.cwiseAbs());
    const double dist = d.dot(L);
    const double overlap = ra + rb - std::abs(dist);
    if (overlap <= 0.0) return q;
    if (overlap < best_overlap) {
      best_overlap = overlap;
      best_axis = dist > 0.0 ? Vec3(-L) : L;
    }
  }

  q.hit = true;
  q.depth = best_overlap;
  q.normal = best_axis;

  // Contact point: trunk corners inside the box, else box corners inside the
  // trunk, else the deepest trunk support point.
  Box grown = box;
  grown.min.array() -= 1e-9;
  grown.max.array() += 1e-9;
  Vec3 sum = Vec3::Zero();
  int count = 0;
  for (int c = 0; c < 8; ++c) {
    const Vec3 local((c & 1 ? 1 : -1) * obb.half_extents.x(), (c & 2 ? 1 : -1) * obb.half_extents.y(),
                     (c & 4 ? 1 : -1) * obb.half_extents.z());
    const Vec3 corner = obb.center + obb.rotation * local;
    if (grown.contains(corner)) {
      sum += corner;
      ++count;
    }
  }
  if (count == 0) {
    for (int c = 0; c < 8; ++c) {
      const Vec3 corner((c & 1 ? box.max : box.min).x(), (c & 2 ? box.max : box.min).y(),
                        (c & 4 ? box.max : box.min).z());
      const Vec3 local = obb.rotation.transpose() * (corner - obb.center);
      if ((local.cwiseAbs().array() <= obb.half_extents.array() + 1e-9).all()) {
        sum += corner;
        ++count;
      }
    }
  }
  if (count > 0) {
    q.point = sum / count;
  } else {
    // edge-edge contact: deepest trunk support point toward the box
    Vec3 support = obb.center;
    for (int i = 0; i < 3; ++i) {
      const double s = obb.rotation.col(i).dot(-q.normal) >= 0.0 ? 1.0 : -1.0;
      support += s * obb.half_extents[i] * obb.rotation.col(i);
    }
    q.point = support;
  }
  return q;
}

ContactResult resolve_contacts(const RobotModel& model, const RobotState& state, const KinematicFrames& frames,
                               const ObstacleSet& obstacles, const ContactParams& params, double friction) {
  ContactResult out;
  const Vec3& P = state.base_position;

  auto apply = [&](const PenetrationQuery& hit, const LegFrames* leg, int leg_index, int last, Vec3& link_force) {
    double depth = hit.depth;
    if (depth > params.max_depth) {
      depth = params.max_depth;
      ++out.deep_penetrations;
    }
    const Vec3 v = point_velocity(state, leg, leg_index, last, hit.point);
    const Vec3 f = penalty_force(params, friction, depth, hit.normal, v);
    link_force += f;
    out.base_force += f;
    out.base_torque += (hit.point - P).cross(f);
    if (leg != nullptr) {
      const auto tau = leg_joint_torques(*leg, static_cast<LinkPart>(last), hit.point, f);
      for (int j = 0; j <= last; ++j) out.joint_torques[leg_index * 3 + j] += tau[j];
    }
  };

  for (const Box& box : obstacles.boxes) {
    const auto base_hit = oriented_box_penetration(frames.base, box);
    if (base_hit.hit) apply(base_hit, nullptr, -1, -1, out.link_forces[0]);

    for (int leg = 0; leg < kNumLegs; ++leg) {
      const LegFrames& lf = frames.legs[leg];
      for (int part = 0; part < 3; ++part) {
        const int link = link_index(leg, static_cast<LinkPart>(part));
        const auto hit = capsule_box_penetration(frames.leg_links[link - 1], box);
        if (hit.hit) apply(hit, &lf, leg, part, out.link_forces[link]);
      }
      const auto foot_hit = point_box_penetration(frames.feet[leg], box);
      if (foot_hit.hit) apply(foot_hit, &lf, leg, 2, out.foot_forces[leg]);
    }
  }
  (void)model;
  return out;
}

ContactReport make_contact_report(const std::array<Vec3, kNumLinks>& link_forces,
                                  const std::array<Vec3, kNumLegs>& foot_forces, const ContactParams& params) {
  ContactReport r;
  r.link_forces = link_forces;
  r.foot_forces = foot_forces;
  for (int i = 0; i < kNumLinks; ++i) r.link_force_magnitudes[i] = link_forces[i].norm();
  r.flags = detect_link_collisions(r, params);
  return r;
}

FlagArray detect_link_collisions(const ContactReport& report, const ContactParams& params) {
  FlagArray flags{};
  for (int i = 0; i < kNumLinks; ++i) flags[i] = report.link_forces[i].norm() > params.flag_threshold;
  for (int leg = 0; leg < kNumLegs; ++leg) {
    const Vec3& f = report.foot_forces[leg];
    const double horizontal = f.head<2>().norm();
    const double vertical = std::abs(f.z());
    flags[foot_flag_index(leg)] = horizontal > std::max(params.stumble_ratio * vertical, params.flag_threshold);
  }
  return flags;
}

}  // namespace qclab::sim
