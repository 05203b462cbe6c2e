#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mlp.hpp"
#include "rng.hpp"

namespace hammer {

// Point-mass physics constants. Defaults follow the usual particle-world
// conventions; episode length and the per-pair collision penalty are fixed
// parts of the task definition.
struct PhysicsParams {
  double dt = 0.1;
  double damping = 0.25;
  double force_scale = 5.0;
  double agent_radius = 0.15;
  double mass = 1.0;
  int episode_length = 25;
  double collision_penalty = 1.0;
};

// Full simulator state for cooperative navigation: N movable agents must
// cover L fixed landmarks. Agent and landmark starts are uniform in [-1,1]^2.
struct NavWorld {
  int n_agents = 0;
  int n_landmarks = 0;
  std::vector<Eigen::Vector2d> agent_pos;
  std::vector<Eigen::Vector2d> agent_vel;
  std::vector<Eigen::Vector2d> landmark_pos;
  int t = 0;
  PhysicsParams params;
};

NavWorld make_nav_world(int n_agents, int n_landmarks = -1,
                        PhysicsParams params = {});

struct StepResult {
  std::vector<Vec> observations;
  std::vector<double> rewards;  // identical copies of the team reward in the
                                // discrete task, per-agent in the continuous one
  bool done = false;
  int collisions = 0;
};

// Discrete action set: stay, +x, -x, +y, -y.
inline constexpr int kNavActionCount = 5;

// Randomize positions, zero velocities, t = 0. Draw order is agents then
// landmarks, x before y, so a given rng stream reproduces worlds bit-exactly.
std::vector<Vec> nav_reset(NavWorld& world, Rng& rng);

// Per-agent local view: [self_vel, self_pos, landmark - self ...,
// other - self ...], others ordered by agent index, own entry skipped.
// Length 4 + 2L + 2(N-1). Other agents' velocities are not observable.
Vec observe(const NavWorld& world, int agent);
int nav_obs_dim(int n_agents, int n_landmarks);

// Unordered agent pairs closer than 2 * agent_radius (strict inequality).
int collision_count(const NavWorld& world);

// -sum_l min_n ||agent_n - landmark_l|| - penalty * colliding pairs.
// Maximized at 0 when every landmark is covered and nobody collides.
double team_reward(const NavWorld& world);

// One step of the discrete task. All agents receive the team reward.
StepResult nav_step(NavWorld& world, const std::vector<int>& actions);

// Continuous-action variant with localized rewards: force = action (clamped
// componentwise to [-1,1]) * force_scale, reward_i = -||agent_i - landmark_i||
// - penalty * (collisions involving i). Requires n_agents == n_landmarks.
StepResult nav_step_continuous(NavWorld& world,
                               const std::vector<Eigen::Vector2d>& actions);

}  // namespace hammer
