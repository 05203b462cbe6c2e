#include "nav_env.hpp"

#include <algorithm>
#include <stdexcept>

namespace hammer {

NavWorld make_nav_world(int n_agents, int n_landmarks, PhysicsParams params) {
  if (n_agents <= 0) throw std::invalid_argument("make_nav_world: n_agents must be positive");
  NavWorld w;
  w.n_agents = n_agents;
  w.n_landmarks = n_landmarks < 0 ? n_agents : n_landmarks;
  if (w.n_landmarks <= 0)
    throw std::invalid_argument("make_nav_world: n_landmarks must be positive");
  w.params = params;
  w.agent_pos.assign(w.n_agents, Eigen::Vector2d::Zero());
  w.agent_vel.assign(w.n_agents, Eigen::Vector2d::Zero());
  w.landmark_pos.assign(w.n_landmarks, Eigen::Vector2d::Zero());
  return w;
}

std::vector<Vec> nav_reset(NavWorld& world, Rng& rng) {
  for (auto& p : world.agent_pos) {
    p.x() = rng.uniform(-1.0, 1.0);
    p.y() = rng.uniform(-1.0, 1.0);
  }
  for (auto& v : world.agent_vel) v.setZero();
  for (auto& p : world.landmark_pos) {
    p.x() = rng.uniform(-1.0, 1.0);
    p.y() = rng.uniform(-1.0, 1.0);
  }
  world.t = 0;
  std::vector<Vec> obs;
  obs.reserve(world.n_agents);
  for (int i = 0; i < world.n_agents; ++i) obs.push_back(observe(world, i));
  return obs;
}

int nav_obs_dim(int n_agents, int n_landmarks) {
  return 4 + 2 * n_landmarks + 2 * (n_agents - 1);
}

Vec observe(const NavWorld& world, int agent) {
  Vec o(nav_obs_dim(world.n_agents, world.n_landmarks));
  int k = 0;
  o[k++] = world.agent_vel[agent].x();
  o[k++] = world.agent_vel[agent].y();
  o[k++] = world.agent_pos[agent].x();
  o[k++] = world.agent_pos[agent].y();
  for (const auto& lm : world.landmark_pos) {
    o[k++] = lm.x() - world.agent_pos[agent].x();
    o[k++] = lm.y() - world.agent_pos[agent].y();
  }
  for (int j = 0; j < world.n_agents; ++j) {
    if (j == agent) continue;
    o[k++] = world.agent_pos[j].x() - world.agent_pos[agent].x();
    o[k++] = world.agent_pos[j].y() - world.agent_pos[agent].y();
  }
  return o;
}

int collision_count(const NavWorld& world) {
  const double threshold = 2.0 * world.params.agent_radius;
  int pairs = 0;
  for (int i = 0; i < world.n_agents; ++i)
    for (int j = i + 1; j < world.n_agents; ++j)
      if ((world.agent_pos[i] - world.agent_pos[j]).norm() < threshold) ++pairs;
  return pairs;
}

double team_reward(const NavWorld& world) {
  double total = 0.0;
  for (const auto& lm : world.landmark_pos) {
    double nearest = std::numeric_limits<double>::infinity();
    for (const auto& ap : world.agent_pos)
      nearest = std::min(nearest, (ap - lm).norm());
    total -= nearest;
  }
  total -= world.params.collision_penalty * collision_count(world);
  return total;
}

namespace {

void integrate(NavWorld& world, const std::vector<Eigen::Vector2d>& forces) {
  const PhysicsParams& p = world.params;
  for (int i = 0; i < world.n_agents; ++i) {
    world.agent_vel[i] = world.agent_vel[i] * (1.0 - p.damping) +
                         forces[i] * (p.force_scale / p.mass) * p.dt;
    world.agent_pos[i] += world.agent_vel[i] * p.dt;
  }
  world.t += 1;
}

void check_steppable(const NavWorld& world, size_t n_actions) {
  if (world.t >= world.params.episode_length)
    throw std::runtime_error("nav_step: episode is done; reset before stepping");
  if (static_cast<int>(n_actions) != world.n_agents)
    throw std::invalid_argument("nav_step: need one action per agent");
}

std::vector<Vec> all_observations(const NavWorld& world) {
  std::vector<Vec> obs;
  obs.reserve(world.n_agents);
  for (int i = 0; i < world.n_agents; ++i) obs.push_back(observe(world, i));
  return obs;
}

}  // namespace

StepResult nav_step(NavWorld& world, const std::vector<int>& actions) {
  check_steppable(world, actions.size());
  static const Eigen::Vector2d kForce[kNavActionCount] = {
      {0.0, 0.0}, {1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0}};
  std::vector<Eigen::Vector2d> forces(world.n_agents);
  for (int i = 0; i < world.n_agents; ++i) {
    if (actions[i] < 0 || actions[i] >= kNavActionCount)
      throw std::invalid_argument("nav_step: action index out of range");
    forces[i] = kForce[actions[i]];
  }
  integrate(world, forces);

  StepResult res;
  res.collisions = collision_count(world);
  const double reward = team_reward(world);
  res.rewards.assign(world.n_agents, reward);
  res.done = world.t >= world.params.episode_length;
  res.observations = all_observations(world);
  return res;
}

StepResult nav_step_continuous(NavWorld& world,
                               const std::vector<Eigen::Vector2d>& actions) {
  check_steppable(world, actions.size());
  if (world.n_landmarks != world.n_agents)
    throw std::invalid_argument(
        "nav_step_continuous: localized rewards need n_landmarks == n_agents");
  std::vector<Eigen::Vector2d> forces(world.n_agents);
  for (int i = 0; i < world.n_agents; ++i) {
    forces[i].x() = std::clamp(actions[i].x(), -1.0, 1.0);
    forces[i].y() = std::clamp(actions[i].y(), -1.0, 1.0);
  }
  integrate(world, forces);

  StepResult res;
  res.collisions = collision_count(world);
  res.rewards.resize(world.n_agents);
  const double threshold = 2.0 * world.params.agent_radius;
  for (int i = 0; i < world.n_agents; ++i) {
    double r = -(world.agent_pos[i] - world.landmark_pos[i]).norm();
    for (int j = 0; j < world.n_agents; ++j) {
      if (j == i) continue;
      if ((world.agent_pos[i] - world.agent_pos[j]).norm() < threshold)
        r -= world.params.collision_penalty;
    }
    res.rewards[i] = r;
  }
  res.done = world.t >= world.params.episode_length;
  res.observations = all_observations(world);
  return res;
}

}  // namespace hammer
