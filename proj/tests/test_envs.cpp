#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "acnmp/envs.hpp"
#include "support/oracles.hpp"

using namespace acnmp;

namespace {

Trajectory resampled(const Trajectory& traj, int points) {
  Trajectory out;
  out.id = traj.id + "_resampled";
  out.task_params = traj.task_params;
  out.times = uniform_grid(points);
  for (double t : out.times) out.values.push_back(traj.value_at(t));
  return out;
}

}  // namespace

// --------------------------- via-point task --------------------------------

TEST_CASE("viapoint_reward is zero on an exact pass-through") {
  ViapointEnv env;
  Trajectory traj;
  traj.id = "t";
  traj.times = {0.0, 0.5, 1.0};
  traj.values = {{0.0}, {0.4}, {0.0}};
  REQUIRE(viapoint_reward(env, traj, {0.5, {0.4}}) == 0.0);
}

TEST_CASE("viapoint_reward equals minus the miss distance") {
  ViapointEnv env;
  Trajectory traj;
  traj.id = "t";
  traj.times = {0.0, 1.0};
  traj.values = {{0.0}, {1.0}};
  // value at t=0.5 is 0.5; condition asks for 1.0
  REQUIRE(viapoint_reward(env, traj, {0.5, {1.0}}) == Catch::Approx(-0.5));
}

TEST_CASE("viapoint_reward matches a dense-resampling oracle") {
  ViapointEnv env;
  Rng rng = make_rng(8);
  Trajectory traj;
  traj.id = "zig";
  traj.times = uniform_grid(37);
  for (std::size_t k = 0; k < traj.times.size(); ++k)
    traj.values.push_back({uniform(rng, -1, 1)});
  const Trajectory fine = resampled(traj, 14401);  // 400x denser grid
  for (int k = 0; k < 50; ++k) {
    const ViapointCondition cond{uniform(rng, 0, 1), {uniform(rng, -1, 1)}};
    REQUIRE(viapoint_reward(env, traj, cond) ==
            Catch::Approx(viapoint_reward(env, fine, cond)).margin(1e-9));
  }
}

TEST_CASE("viapoint demos share exact endpoints and avoid the obstacles") {
  ViapointEnv env;
  Rng rng = make_rng(1);
  const auto demos = viapoint_demos(env, 6, rng, 101);  // grid contains t = 0.5
  REQUIRE(demos.size() == 6);
  for (const auto& d : demos.trajectories) {
    REQUIRE(d.times.front() == 0.0);
    REQUIRE(d.times.back() == 1.0);
    REQUIRE(d.values.front()[0] == 0.0);
    REQUIRE(d.values.back()[0] == 0.0);
    // brute-force point-in-ellipse check over every sample
    for (std::size_t k = 0; k < d.size(); ++k)
      for (const Ellipse& e : env.obstacles)
        REQUIRE_FALSE(e.contains(d.times[k], d.values[k][0]));
    // gamma records the apex height
    REQUIRE(d.value_at(0.5)[0] == Catch::Approx(d.task_params[0]).margin(1e-6));
  }
}

TEST_CASE("viapoint demos are reproducible bit-exactly per seed") {
  ViapointEnv env;
  Rng a = make_rng(77), b = make_rng(77), c = make_rng(78);
  const auto da = viapoint_demos(env, 6, a);
  const auto db = viapoint_demos(env, 6, b);
  const auto dc = viapoint_demos(env, 6, c);
  for (int i = 0; i < 6; ++i) {
    REQUIRE(da.trajectories[i].values == db.trajectories[i].values);
    REQUIRE(da.trajectories[i].task_params == db.trajectories[i].task_params);
  }
  REQUIRE(da.trajectories[0].task_params != dc.trajectories[0].task_params);
}

TEST_CASE("viapoint demos support independently drawn non-uniform grids") {
  ViapointEnv env;
  Rng rng = make_rng(3);
  const auto demos = viapoint_demos(env, 4, rng, 120, true);
  for (const auto& d : demos.trajectories) REQUIRE_NOTHROW(d.validate());
  REQUIRE(demos.trajectories[0].times != demos.trajectories[1].times);
}

// ----------------------------- pushing task --------------------------------

TEST_CASE("push reward without contact is minus the start-target distance") {
  PushEnv env = make_push_env(0);
  // arm folded far from the object the whole time
  Trajectory still;
  still.id = "still";
  still.task_params = env.gamma();
  still.times = {0.0, 1.0};
  still.values = {{3.0, 0.1, 0.1}, {3.0, 0.2, 0.1}};
  REQUIRE(env.evaluate(still) ==
          Catch::Approx(-distance(env.object_start, env.target)).margin(1e-9));
}

TEST_CASE("scripted push demos reach their targets within the tolerance") {
  for (int idx : {0, 4, 9}) {
    const PushEnv env = make_push_env(idx);
    const Trajectory demo = push_demo(env);
    REQUIRE(env.evaluate(demo) >= -0.01);
    REQUIRE(demo.task_params == env.gamma());
  }
}

TEST_CASE("push_demos excludes the held-out target and self-verifies") {
  std::vector<int> indices;
  for (int i = 0; i < 10; ++i)
    if (i != 9) indices.push_back(i);
  const auto demos = push_demos(indices, 80);
  REQUIRE(demos.size() == 9);
  for (std::size_t k = 0; k < demos.size(); ++k) {
    const PushEnv env = make_push_env(indices[k]);
    REQUIRE(demos.trajectories[k].task_params == env.gamma());
    REQUIRE(env.evaluate(demos.trajectories[k]) >= -0.01);
  }
  const auto held_out = make_push_env(9).gamma();
  for (const auto& d : demos.trajectories) REQUIRE(d.task_params != held_out);
}

TEST_CASE("push reward is stable under trajectory sample density doubling") {
  const PushEnv env = make_push_env(3);
  const Trajectory demo = push_demo(env, 200);
  const double base = env.evaluate(demo);
  const double doubled = env.evaluate(resampled(demo, 400));
  REQUIRE(std::abs(base - doubled) < 1e-3);
}

TEST_CASE("push evaluation is pure and deterministic") {
  const PushEnv env = make_push_env(2);
  const Trajectory demo = push_demo(env, 60);
  REQUIRE(env.evaluate(demo) == env.evaluate(demo));
}

// --------------------------- wall avoidance --------------------------------

TEST_CASE("wall reward is zero for a perfect path") {
  WallEnv env;
  env.hole_x = 4.0;
  env.hole_y = 6.0;
  env.goal_x = 8.0;
  env.goal_y = 3.0;
  const Trajectory demo = wall_demo(env);
  REQUIRE(env.evaluate(demo) >= -1e-6);
  REQUIRE(env.evaluate(demo) <= 0.0);
}

TEST_CASE("wall penetration matches the analytic integral for a straight crossing") {
  WallEnv env;  // hole at (5,5), half thickness 0.1, half height 0.5
  env.start = {4.5, 7.0};
  env.goal_x = 5.5;
  env.goal_y = 7.0;
  Trajectory crossing;
  crossing.id = "crossing";
  crossing.times = {0.0, 1.0};
  crossing.values = {{4.5, 7.0}, {5.5, 7.0}};
  // depth along the segment: max(0, 0.1 - |x-5|), time integral = 0.01
  const double reward = env.evaluate(crossing);
  REQUIRE(reward == Catch::Approx(-0.01).epsilon(0.01));

  // dense-sampling oracle, trapezoid on a 20x finer grid
  double oracle = 0.0;
  const int n = 81920;
  for (int k = 0; k < n; ++k) {
    const double xa = 4.5 + (static_cast<double>(k) / n);
    const double xb = 4.5 + (static_cast<double>(k + 1) / n);
    const double da = std::max(0.0, 0.1 - std::abs(xa - 5.0));
    const double db = std::max(0.0, 0.1 - std::abs(xb - 5.0));
    oracle += 0.5 * (da + db) / n;
  }
  REQUIRE(reward == Catch::Approx(-oracle).epsilon(0.01));
}

TEST_CASE("wall reward is translation invariant") {
  WallEnv env;
  env.hole_x = 4.0;
  env.hole_y = 5.0;
  env.goal_x = 7.5;
  env.goal_y = 6.0;
  const Trajectory demo = wall_demo(env);

  const double dx = 13.7, dy = -4.2;
  WallEnv moved = env;
  moved.hole_x += dx;
  moved.hole_y += dy;
  moved.goal_x += dx;
  moved.goal_y += dy;
  moved.start = {env.start[0] + dx, env.start[1] + dy};
  Trajectory shifted = demo;
  for (auto& v : shifted.values) {
    v[0] += dx;
    v[1] += dy;
  }
  REQUIRE(env.evaluate(demo) == Catch::Approx(moved.evaluate(shifted)).margin(1e-9));
}

TEST_CASE("wall reward is stable under sample density doubling") {
  WallEnv env;
  env.hole_x = 6.0;
  env.hole_y = 4.0;
  env.goal_x = 9.0;
  env.goal_y = 8.0;
  const Trajectory demo = wall_demo(env, 200);
  REQUIRE(std::abs(env.evaluate(demo) - env.evaluate(resampled(demo, 400))) < 1e-3);
}

TEST_CASE("sample_wall_env honors the documented ranges") {
  Rng rng = make_rng(123);
  std::vector<double> xs;
  for (int k = 0; k < 10000; ++k) {
    const WallEnv env = sample_wall_env(rng);
    REQUIRE(env.hole_x >= 2.0);
    REQUIRE(env.hole_x <= 8.0);
    REQUIRE(env.hole_y >= 1.0);
    REQUIRE(env.hole_y <= 9.0);
    REQUIRE(env.goal_x >= env.hole_x + 1.5);
    REQUIRE(env.goal_x <= 10.0);
    REQUIRE(env.goal_y >= 0.0);
    REQUIRE(env.goal_y <= 10.0);
    REQUIRE_NOTHROW(env.validate());
    xs.push_back(env.hole_x);
  }
  REQUIRE(oracles::ks_uniform_pvalue(xs, 2.0, 8.0) > 0.01);

  Rng a = make_rng(5), b = make_rng(5);
  const WallEnv ea = sample_wall_env(a), eb = sample_wall_env(b);
  REQUIRE(ea.gamma() == eb.gamma());
}

// ----------------------------- button task ---------------------------------

TEST_CASE("button reward without cube contact is the no-contact value") {
  TransferBench bench;
  const ButtonEnv env = button_env(bench.target_arm);
  Trajectory still;
  still.id = "still";
  still.times = {0.0, 1.0};
  still.values.assign(2, std::vector<double>(bench.target_arm.dof(), 1.5));
  REQUIRE(env.evaluate(still) == Catch::Approx(env.no_contact_reward()));
  REQUIRE(env.no_contact_reward() == Catch::Approx(-0.4));
}

TEST_CASE("scripted button trajectories succeed on both arms") {
  TransferBench bench;
  for (const PlanarArm& arm : {bench.source_arm, bench.target_arm}) {
    const ButtonEnv env = button_env(arm);
    const Trajectory demo = button_demo(bench, arm, 200);
    REQUIRE(env.evaluate(demo) >= -0.01);
  }
}

TEST_CASE("a straight reach collides with the gap edge and forfeits pushing") {
  TransferBench bench;
  const ButtonEnv env = button_env(bench.target_arm);
  const auto times = uniform_grid(150);
  // straight end-effector line from home toward the cube: crosses the wall
  const auto path = detail::segment_path({bench.home, {2.0, 0.6}}, {1.0}, times);
  bool crosses = false;
  for (const auto& p : path) crosses = crosses || env.wall_depth(p) > 0.0;
  REQUIRE(crosses);

  const Trajectory traj = ee_script_demo(bench.target_arm, bench, path, times, "straight");
  REQUIRE(env.evaluate(traj) == Catch::Approx(env.no_contact_reward()));
}

TEST_CASE("rewards are never positive") {
  Rng rng = make_rng(9);
  ViapointEnv via;
  const auto demos = viapoint_demos(via, 3, rng, 40);
  for (const auto& d : demos.trajectories)
    REQUIRE(viapoint_reward(via, d, {uniform(rng, 0, 1), {uniform(rng, -1, 1)}}) <= 0.0);

  const PushEnv push = make_push_env(5);
  REQUIRE(push.evaluate(push_demo(push, 50)) <= 0.0);

  WallEnv wall = sample_wall_env(rng);
  REQUIRE(wall.evaluate(wall_demo(wall, 60)) <= 0.0);
}
