#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace acnmp {

using Point2 = std::array<double, 2>;

inline double norm2(const Point2& p) { return std::sqrt(p[0] * p[0] + p[1] * p[1]); }

inline Point2 operator-(const Point2& a, const Point2& b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Point2 operator+(const Point2& a, const Point2& b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Point2 operator*(double s, const Point2& p) { return {s * p[0], s * p[1]}; }
inline double distance(const Point2& a, const Point2& b) { return norm2(a - b); }

/// Planar revolute-joint arm anchored at the origin.
struct PlanarArm {
  std::vector<double> link_lengths;

  int dof() const { return static_cast<int>(link_lengths.size()); }
  double reach() const {
    double r = 0.0;
    for (double l : link_lengths) r += l;
    return r;
  }
};

/// Cumulative-angle forward kinematics. Returns the base plus every joint
/// end position; back() is the end effector.
inline std::vector<Point2> fk_planar(const PlanarArm& arm, const std::vector<double>& joint_angles) {
  if (joint_angles.size() != arm.link_lengths.size())
    throw std::invalid_argument("fk_planar: angle count does not match link count");
  std::vector<Point2> positions;
  positions.reserve(arm.link_lengths.size() + 1);
  positions.push_back({0.0, 0.0});
  double angle = 0.0;
  for (std::size_t k = 0; k < arm.link_lengths.size(); ++k) {
    angle += joint_angles[k];
    const Point2& prev = positions.back();
    positions.push_back(
        {prev[0] + arm.link_lengths[k] * std::cos(angle), prev[1] + arm.link_lengths[k] * std::sin(angle)});
  }
  return positions;
}

inline Point2 end_effector(const PlanarArm& arm, const std::vector<double>& joint_angles) {
  return fk_planar(arm, joint_angles).back();
}

/// 2 x dof end-effector Jacobian.
inline std::vector<std::array<double, 2>> ee_jacobian(const PlanarArm& arm,
                                                      const std::vector<double>& q) {
  const auto pos = fk_planar(arm, q);
  const Point2 ee = pos.back();
  std::vector<std::array<double, 2>> jac(arm.dof());
  for (int k = 0; k < arm.dof(); ++k) {
    // column k: cross(z, ee - joint_k)
    jac[k] = {-(ee[1] - pos[k][1]), ee[0] - pos[k][0]};
  }
  return jac;
}

/// Damped least-squares inverse kinematics toward a target end-effector
/// position. Intended for tracking: pass the previous solution as q to keep
/// the configuration branch continuous.
inline std::vector<double> ik_step_toward(const PlanarArm& arm, std::vector<double> q,
                                          const Point2& target, int iterations = 50,
                                          double damping = 1e-3, double tolerance = 1e-9) {
  for (int it = 0; it < iterations; ++it) {
    const Point2 ee = end_effector(arm, q);
    const Point2 err = target - ee;
    if (norm2(err) < tolerance) break;
    const auto jac = ee_jacobian(arm, q);

    // dq = J^T (J J^T + damping I)^{-1} err, with J J^T a 2x2 matrix
    double a = damping, b = 0.0, c = damping;
    for (int k = 0; k < arm.dof(); ++k) {
      a += jac[k][0] * jac[k][0];
      b += jac[k][0] * jac[k][1];
      c += jac[k][1] * jac[k][1];
    }
    const double det = a * c - b * b;
    const double y0 = (c * err[0] - b * err[1]) / det;
    const double y1 = (a * err[1] - b * err[0]) / det;
    for (int k = 0; k < arm.dof(); ++k) q[k] += jac[k][0] * y0 + jac[k][1] * y1;
  }
  return q;
}

/// Tracks a dense end-effector path with warm-started IK; returns one joint
/// configuration per path sample. Throws when tracking error stays large.
inline std::vector<std::vector<double>> ik_track_path(const PlanarArm& arm,
                                                      const std::vector<Point2>& path,
                                                      std::vector<double> q_start,
                                                      double max_error = 1e-6) {
  std::vector<std::vector<double>> joints;
  joints.reserve(path.size());
  std::vector<double> q = std::move(q_start);
  for (const Point2& target : path) {
    q = ik_step_toward(arm, q, target, 200);
    if (distance(end_effector(arm, q), target) > max_error)
      throw std::runtime_error("ik_track_path: failed to reach path point");
    joints.push_back(q);
  }
  return joints;
}

}  // namespace acnmp
