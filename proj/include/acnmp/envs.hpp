#pragma once

// Analytic benchmark environments: 2D via-point obstacle avoidance, planar
// arm pushing, parametric wall avoidance and the narrow-gap button task used
// for cross-morphology transfer. Every environment is an immutable value
// whose evaluate() is a pure function of (instance, trajectory); rewards are
// always <= 0 with 0 the unique perfect score.

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "acnmp/kinematics.hpp"
#include "acnmp/rng.hpp"
#include "acnmp/trajectory.hpp"

namespace acnmp {

inline double smoothstep(double u) {
  u = std::clamp(u, 0.0, 1.0);
  return u * u * (3.0 - 2.0 * u);
}

/// Densely resamples a trajectory onto n+1 uniform times in [0,1] with a
/// single linear sweep (equivalent to value_at on each time).
inline std::vector<std::vector<double>> dense_resample(const Trajectory& traj, int n) {
  std::vector<std::vector<double>> out;
  out.reserve(n + 1);
  std::size_t seg = 0;
  for (int k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) / n;
    if (t <= traj.times.front()) {
      out.push_back(traj.values.front());
      continue;
    }
    if (t >= traj.times.back()) {
      out.push_back(traj.values.back());
      continue;
    }
    while (traj.times[seg + 1] < t) ++seg;
    const double w = (t - traj.times[seg]) / (traj.times[seg + 1] - traj.times[seg]);
    std::vector<double> v(traj.values[seg].size());
    for (std::size_t d = 0; d < v.size(); ++d)
      v[d] = (1.0 - w) * traj.values[seg][d] + w * traj.values[seg + 1][d];
    out.push_back(std::move(v));
  }
  return out;
}

/// Quasi-static disc pushing: when an effector step penetrates the disc, the
/// disc translates along the effector's direction of motion just far enough
/// to restore contact, so only the motion component projected on the contact
/// normal produces displacement. The effector path must already be densely
/// sampled relative to the radius.
inline Point2 push_disc(const std::vector<Point2>& effector_path, Point2 center, double radius) {
  for (std::size_t k = 0; k < effector_path.size(); ++k) {
    const Point2& p = effector_path[k];
    const Point2 u = center - p;
    const double dist = norm2(u);
    if (dist >= radius) continue;

    Point2 v{0.0, 0.0};
    if (k > 0) v = p - effector_path[k - 1];
    const double speed = norm2(v);
    if (speed > 1e-12 && dist > 1e-12) {
      const Point2 vhat{v[0] / speed, v[1] / speed};
      const double uv = u[0] * vhat[0] + u[1] * vhat[1];
      const double disc = uv * uv - dist * dist + radius * radius;
      center = center + ((-uv + std::sqrt(disc)) * vhat);
    } else if (dist > 1e-12) {
      center = p + (radius / dist) * u;  // static overlap: resolve along the normal
    } else {
      center = {p[0] + radius, p[1]};
    }
  }
  return center;
}

// ---------------------------------------------------------------------------
// 2D via-point obstacle avoidance
// ---------------------------------------------------------------------------

struct Ellipse {
  double cx, cy, rx, ry;
  bool contains(double x, double y) const {
    const double u = (x - cx) / rx;
    const double v = (y - cy) / ry;
    return u * u + v * v <= 1.0;
  }
};

/// Desired pass-through point for the 1D-over-time via-point task: the
/// trajectory value at time t must match `value`.
struct ViapointCondition {
  double t = 0.5;
  std::vector<double> value;
};

/// The 2D world of the via-point task: trajectories are y(t) curves between
/// fixed endpoints arcing over two static elliptical obstacles. The task
/// parameter gamma is the apex height of the demonstrated curve family.
struct ViapointEnv {
  std::array<Ellipse, 2> obstacles{{{0.35, 0.03, 0.10, 0.05}, {0.65, 0.03, 0.10, 0.05}}};
  double demo_height_min = 0.15;
  double demo_height_max = 0.45;
  double success_threshold = -0.05;

  // parabolic bump: apex = height at t = 0.5, endpoints exactly zero
  double curve(double height, double t) const { return 4.0 * height * t * (1.0 - t); }
  ViapointCondition condition_for(double height, double t_star = 0.5) const {
    return {t_star, {curve(height, t_star)}};
  }
};

// Canonical out-of-range conditioning height (demo envelope tops out at
// 0.45); used by the extrapolation experiments.
inline constexpr double kViapointExtrapolationHeight = 0.7;

/// Minus distance between the trajectory value at the condition time and the
/// condition point, with linear interpolation between samples. Zero iff the
/// trajectory passes exactly through the point.
inline double viapoint_reward(const ViapointEnv&, const Trajectory& traj,
                              const ViapointCondition& cond) {
  if (cond.t < 0.0 || cond.t > 1.0)
    throw std::invalid_argument("viapoint_reward: condition time outside [0,1]");
  const auto v = traj.value_at(cond.t);
  if (v.size() != cond.value.size())
    throw std::invalid_argument("viapoint_reward: condition width mismatch");
  double s = 0.0;
  for (std::size_t d = 0; d < v.size(); ++d) s += (v[d] - cond.value[d]) * (v[d] - cond.value[d]);
  return -std::sqrt(s);
}

/// n analytic demonstrations with fixed endpoints and jittered, evenly
/// spread apex heights; gamma = apex height. With nonuniform_grid the sample
/// times of each demonstration are drawn independently instead of shared.
inline DemonstrationSet viapoint_demos(const ViapointEnv& env, int n, Rng& rng, int points = 200,
                                       bool nonuniform_grid = false) {
  if (n < 1) throw std::invalid_argument("viapoint_demos: n must be >= 1");
  if (points < 2) throw std::invalid_argument("viapoint_demos: points must be >= 2");
  DemonstrationSet demos;
  const double span = env.demo_height_max - env.demo_height_min;
  for (int i = 0; i < n; ++i) {
    const double base =
        n == 1 ? env.demo_height_min + 0.5 * span
               : env.demo_height_min + span * static_cast<double>(i) / (n - 1);
    const double spacing = n == 1 ? span : span / (n - 1);
    const double h = base + 0.2 * spacing * uniform(rng, -1.0, 1.0);

    Trajectory traj;
    traj.id = "via_" + std::to_string(i);
    traj.task_params = {h};
    if (nonuniform_grid) {
      std::vector<double> ts(points - 2);
      for (auto& t : ts) t = uniform(rng, 0.0, 1.0);
      std::sort(ts.begin(), ts.end());
      traj.times.push_back(0.0);
      double prev = 0.0;
      for (double t : ts) {
        if (t <= prev + 1e-9) t = prev + 1e-9;  // keep strictly increasing
        if (t >= 1.0) break;
        traj.times.push_back(t);
        prev = t;
      }
      traj.times.push_back(1.0);
    } else {
      traj.times = uniform_grid(points);
    }
    for (double t : traj.times) traj.values.push_back({env.curve(h, t)});
    traj.validate();
    demos.add(std::move(traj));
  }
  return demos;
}

// ---------------------------------------------------------------------------
// Planar-arm pushing
// ---------------------------------------------------------------------------

/// Push a disc from a fixed start to a target with a 3-dof planar arm.
/// Trajectories are joint-space; the reward is the minus distance between
/// the final and target object positions under quasi-static pushing.
struct PushEnv {
  PlanarArm arm{{1.0, 1.0, 1.0}};
  Point2 object_start{1.2, 0.0};
  double object_radius = 0.12;
  Point2 target{2.0, 0.0};
  double success_threshold = -0.01;
  int sim_samples = 4096;

  std::vector<double> gamma() const { return {target[0], target[1]}; }

  Point2 simulate_object(const Trajectory& joint_traj) const {
    if (joint_traj.sm_width() != arm.dof())
      throw std::invalid_argument("push: joint trajectory width != arm dof");
    const auto joints = dense_resample(joint_traj, sim_samples);
    std::vector<Point2> ee;
    ee.reserve(joints.size());
    for (const auto& q : joints) ee.push_back(end_effector(arm, q));
    return push_disc(ee, object_start, object_radius);
  }

  double evaluate(const Trajectory& joint_traj) const {
    return -distance(simulate_object(joint_traj), target);
  }
};

/// The ten canonical object target positions, laid out on an arc.
inline std::vector<Point2> push_targets() {
  std::vector<Point2> targets;
  const double radius = 2.0;
  for (int i = 0; i < 10; ++i) {
    const double deg = -25.0 + 50.0 * static_cast<double>(i) / 9.0;
    const double phi = deg * 3.14159265358979323846 / 180.0;
    targets.push_back({radius * std::cos(phi), radius * std::sin(phi)});
  }
  return targets;
}

inline PushEnv make_push_env(int target_index) {
  const auto targets = push_targets();
  if (target_index < 0 || target_index >= static_cast<int>(targets.size()))
    throw std::invalid_argument("make_push_env: target index out of range");
  PushEnv env;
  env.target = targets[target_index];
  return env;
}

namespace detail {

inline std::vector<double> push_home_joints(const PlanarArm& arm, const Point2& home_ee) {
  std::vector<double> guess(arm.dof(), -0.5);
  guess[0] = 1.5;
  const auto q = ik_step_toward(arm, guess, home_ee, 500);
  if (distance(end_effector(arm, q), home_ee) > 1e-8)
    throw std::runtime_error("push_home_joints: home pose unreachable");
  return q;
}

}  // namespace detail

/// Scripted planner for one pushing demonstration: approach a point behind
/// the object along the push line, then drive straight through so the disc
/// comes to rest on the target. Joint angles via warm-started IK tracking.
inline Trajectory push_demo(const PushEnv& env, int points = 200) {
  const Point2 home_ee{0.8, 0.0};
  const Point2 dir = env.target - env.object_start;
  const double len = norm2(dir);
  if (len < 1e-9) throw std::runtime_error("push_demo: target equals object start");
  const Point2 d{dir[0] / len, dir[1] / len};
  const Point2 push_start = env.object_start - ((env.object_radius + 0.05) * d);
  const Point2 push_end = env.target - (env.object_radius * d);

  const double approach_end = 0.4;
  std::vector<double> times = uniform_grid(points);
  std::vector<Point2> ee_path;
  ee_path.reserve(points);
  for (double t : times) {
    if (t <= approach_end) {
      const double s = smoothstep(t / approach_end);
      ee_path.push_back(home_ee + s * (push_start - home_ee));
    } else {
      const double s = smoothstep((t - approach_end) / (1.0 - approach_end));
      ee_path.push_back(push_start + s * (push_end - push_start));
    }
  }

  const auto joints = ik_track_path(env.arm, ee_path, detail::push_home_joints(env.arm, home_ee));
  Trajectory traj;
  traj.id = "push_" + std::to_string(env.target[0]) + "_" + std::to_string(env.target[1]);
  traj.task_params = env.gamma();
  traj.times = std::move(times);
  traj.values = joints;
  traj.validate();
  return traj;
}

/// One self-verified demonstration per requested target index.
inline DemonstrationSet push_demos(const std::vector<int>& target_indices, int points = 200) {
  DemonstrationSet demos;
  for (int idx : target_indices) {
    const PushEnv env = make_push_env(idx);
    Trajectory traj = push_demo(env, points);
    const double reward = env.evaluate(traj);
    if (reward < -0.01)
      throw std::runtime_error("push_demos: planner failed on target " + std::to_string(idx) +
                               " (reward " + std::to_string(reward) + ")");
    traj.id = "push_" + std::to_string(idx);
    demos.add(std::move(traj));
  }
  return demos;
}

// ---------------------------------------------------------------------------
// Parametric wall avoidance
// ---------------------------------------------------------------------------

/// A vertical wall with a hole, between a fixed start point and a sampled
/// goal, in a [0,10]^2 workspace. The wall is two half-infinite strips above
/// and below the hole; the penalty is penetration depth integrated over the
/// trajectory. gamma = (hole_x, hole_y, goal_x, goal_y).
struct WallEnv {
  double hole_x = 5.0, hole_y = 5.0, goal_x = 8.0, goal_y = 5.0;
  double hole_half_height = 0.5;
  double wall_half_thickness = 0.1;
  Point2 start{0.0, 5.0};
  double success_threshold = -0.1;
  int sim_samples = 4096;

  std::vector<double> gamma() const { return {hole_x, hole_y, goal_x, goal_y}; }

  void validate() const {
    if (hole_x < 2.0 || hole_x > 8.0 || hole_y < 1.0 || hole_y > 9.0 || goal_x < hole_x + 1.5 ||
        goal_x > 10.0 || goal_y < 0.0 || goal_y > 10.0)
      throw std::invalid_argument("wall env: parameters outside the sampling ranges");
  }

  double penetration_depth(const Point2& p) const {
    const double dx = wall_half_thickness - std::abs(p[0] - hole_x);
    if (dx <= 0.0) return 0.0;
    const double dy = std::max(p[1] - (hole_y + hole_half_height),
                               (hole_y - hole_half_height) - p[1]);
    if (dy <= 0.0) return 0.0;
    return std::min(dx, dy);
  }

  /// reward = -( |traj(0) - start| + |traj(1) - goal| + integral of
  /// penetration depth over t in [0,1] ), trapezoidal rule on a dense grid.
  double evaluate(const Trajectory& traj) const {
    if (traj.sm_width() != 2) throw std::invalid_argument("wall: trajectory must be 2D");
    const auto pts = dense_resample(traj, sim_samples);
    const Point2 goal{goal_x, goal_y};
    const double d0 = distance({pts.front()[0], pts.front()[1]}, start);
    const double d1 = distance({pts.back()[0], pts.back()[1]}, goal);
    double penalty = 0.0;
    const double dt = 1.0 / sim_samples;
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
      const double a = penetration_depth({pts[k][0], pts[k][1]});
      const double b = penetration_depth({pts[k + 1][0], pts[k + 1][1]});
      penalty += 0.5 * (a + b) * dt;
    }
    return -(d0 + d1 + penalty);
  }
};

/// Uniform draw over the documented ranges, honoring goal_x >= hole_x + 1.5.
/// Draw order: hole_x, hole_y, goal_x, goal_y.
inline WallEnv sample_wall_env(Rng& rng) {
  WallEnv env;
  env.hole_x = uniform(rng, 2.0, 8.0);
  env.hole_y = uniform(rng, 1.0, 9.0);
  env.goal_x = uniform(rng, env.hole_x + 1.5, 10.0);
  env.goal_y = uniform(rng, 0.0, 10.0);
  return env;
}

/// Scripted wall-avoidance demonstration: a constant-speed smoothed path
/// start -> before-hole -> after-hole -> goal. Constant speed means the
/// hole crossing lands at a different time in every environment.
inline Trajectory wall_demo(const WallEnv& env, int points = 200) {
  const std::vector<Point2> waypoints{
      env.start, {env.hole_x - 0.6, env.hole_y}, {env.hole_x + 0.6, env.hole_y},
      {env.goal_x, env.goal_y}};

  // dense arc-length-uniform polyline
  const int dense_n = 800;
  std::vector<double> seg_len(waypoints.size() - 1);
  double total = 0.0;
  for (std::size_t s = 0; s + 1 < waypoints.size(); ++s) {
    seg_len[s] = distance(waypoints[s], waypoints[s + 1]);
    total += seg_len[s];
  }
  std::vector<Point2> dense;
  dense.reserve(dense_n + 1);
  for (int k = 0; k <= dense_n; ++k) {
    double arc = total * k / dense_n;
    std::size_t s = 0;
    while (s + 1 < seg_len.size() && arc > seg_len[s]) {
      arc -= seg_len[s];
      ++s;
    }
    const double w = seg_len[s] > 0 ? std::min(arc / seg_len[s], 1.0) : 0.0;
    dense.push_back(waypoints[s] + w * (waypoints[s + 1] - waypoints[s]));
  }

  // local box smoothing with a symmetric window that vanishes at the ends,
  // so endpoints stay exact and the straight hole crossing is untouched
  std::vector<Point2> smooth(dense.size());
  for (std::size_t i = 0; i < dense.size(); ++i) {
    const std::size_t half =
        std::min<std::size_t>({8, i, dense.size() - 1 - i});
    Point2 acc{0.0, 0.0};
    for (std::size_t j = i - half; j <= i + half; ++j) acc = acc + dense[j];
    smooth[i] = (1.0 / (2.0 * half + 1.0)) * acc;
  }

  Trajectory traj;
  traj.id = "wall_demo";
  traj.task_params = env.gamma();
  traj.times = uniform_grid(points);
  traj.values.reserve(points);
  for (int k = 0; k < points; ++k) {
    const std::size_t idx =
        static_cast<std::size_t>(std::llround(static_cast<double>(k) * dense_n / (points - 1)));
    traj.values.push_back({smooth[idx][0], smooth[idx][1]});
  }
  traj.validate();
  return traj;
}

// ---------------------------------------------------------------------------
// Narrow-gap button task (transfer learning test task)
// ---------------------------------------------------------------------------

/// The end effector must thread a gap in a wall and then push a cube onto a
/// goal marker. Any wall contact forfeits the cube displacement. Reward is
/// the minus distance between the cube and the goal; the task is sparse in
/// the sense that every non-contact trajectory scores the same.
struct ButtonEnv {
  PlanarArm arm{{0.75, 0.75, 0.75, 0.75}};
  double wall_x = 1.5, gap_y = 0.6;
  double gap_half_height = 0.25;
  double wall_half_thickness = 0.1;
  Point2 cube_start{2.1, 0.6};
  double cube_radius = 0.1;
  Point2 cube_goal{2.5, 0.6};
  double success_threshold = -0.01;
  int sim_samples = 4096;

  double wall_depth(const Point2& p) const {
    const double dx = wall_half_thickness - std::abs(p[0] - wall_x);
    if (dx <= 0.0) return 0.0;
    const double dy =
        std::max(p[1] - (gap_y + gap_half_height), (gap_y - gap_half_height) - p[1]);
    if (dy <= 0.0) return 0.0;
    return std::min(dx, dy);
  }

  double no_contact_reward() const { return -distance(cube_start, cube_goal); }

  double evaluate(const Trajectory& joint_traj) const {
    if (joint_traj.sm_width() != arm.dof())
      throw std::invalid_argument("button: joint trajectory width != arm dof");
    const auto joints = dense_resample(joint_traj, sim_samples);
    std::vector<Point2> ee;
    ee.reserve(joints.size());
    for (const auto& q : joints) {
      ee.push_back(end_effector(arm, q));
      if (wall_depth(ee.back()) > 0.0) return no_contact_reward();
    }
    return -distance(push_disc(ee, cube_start, cube_radius), cube_goal);
  }
};

// ---------------------------------------------------------------------------
// Transfer-learning bench: two planar arms sharing end-effector task scripts
// ---------------------------------------------------------------------------

struct TransferBench {
  PlanarArm source_arm{{1.0, 1.0, 1.0}};
  PlanarArm target_arm{{0.75, 0.75, 0.75, 0.75}};
  Point2 home{0.6, 1.6};
  static constexpr int kProxyTasks = 4;
};

inline std::vector<double> home_joints(const PlanarArm& arm, const Point2& home) {
  std::vector<double> guess(arm.dof(), -0.5);
  guess[0] = 1.5;
  const auto q = ik_step_toward(arm, guess, home, 500);
  if (distance(end_effector(arm, q), home) > 1e-8)
    throw std::runtime_error("home_joints: home pose unreachable");
  return q;
}

namespace detail {

inline std::vector<Point2> segment_path(const std::vector<Point2>& waypoints,
                                        const std::vector<double>& phase_ends,
                                        const std::vector<double>& times) {
  std::vector<Point2> path;
  path.reserve(times.size());
  for (double t : times) {
    std::size_t s = 0;
    double lo = 0.0;
    while (s < phase_ends.size() - 1 && t > phase_ends[s]) {
      lo = phase_ends[s];
      ++s;
    }
    const double u = (t - lo) / (phase_ends[s] - lo);
    path.push_back(waypoints[s] + smoothstep(u) * (waypoints[s + 1] - waypoints[s]));
  }
  return path;
}

}  // namespace detail

/// End-effector script of proxy task k (reaches, a push stroke, an
/// insertion-style descent), shared by both morphologies.
inline std::vector<Point2> proxy_ee_path(const TransferBench& bench, int task,
                                         const std::vector<double>& times) {
  switch (task) {
    case 0:
      return detail::segment_path({bench.home, {2.0, 0.9}}, {1.0}, times);
    case 1:
      return detail::segment_path({bench.home, {0.9, 2.3}}, {1.0}, times);
    case 2:
      return detail::segment_path({bench.home, {1.4, 0.2}, {2.2, 0.2}}, {0.4, 1.0}, times);
    case 3:
      return detail::segment_path({bench.home, {2.1, 1.4}, {2.1, 0.7}}, {0.5, 1.0}, times);
    default:
      throw std::invalid_argument("proxy_ee_path: unknown task");
  }
}

/// The scripted solution of the button task: through the gap, then push.
inline std::vector<Point2> button_ee_path(const TransferBench& bench,
                                          const std::vector<double>& times) {
  return detail::segment_path({bench.home, {1.1, 0.6}, {1.9, 0.6}, {2.4, 0.6}}, {0.35, 0.7, 1.0},
                              times);
}

/// Joint-space demonstration of an end-effector script on one arm.
inline Trajectory ee_script_demo(const PlanarArm& arm, const TransferBench& bench,
                                 const std::vector<Point2>& ee_path,
                                 const std::vector<double>& times, const std::string& id,
                                 const std::vector<double>& gamma = {}) {
  Trajectory traj;
  traj.id = id;
  traj.task_params = gamma;
  traj.times = times;
  traj.values = ik_track_path(arm, ee_path, home_joints(arm, bench.home));
  traj.validate();
  return traj;
}

inline Trajectory proxy_demo(const TransferBench& bench, const PlanarArm& arm, int task,
                             int points) {
  const auto times = uniform_grid(points);
  return ee_script_demo(arm, bench, proxy_ee_path(bench, task, times), times,
                        "proxy_" + std::to_string(task));
}

inline Trajectory button_demo(const TransferBench& bench, const PlanarArm& arm, int points) {
  const auto times = uniform_grid(points);
  return ee_script_demo(arm, bench, button_ee_path(bench, times), times, "button");
}

inline ButtonEnv button_env(const PlanarArm& arm) {
  ButtonEnv env;
  env.arm = arm;
  return env;
}

}  // namespace acnmp
