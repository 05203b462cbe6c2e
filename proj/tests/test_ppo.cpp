#include <cmath>
#include <vector>

#include "distributions.hpp"
#include "doctest.h"
#include "ppo.hpp"
#include "rng.hpp"

using namespace hammer;

namespace {

// O(T^2) returns oracle: for each position, walk forward accumulating
// discounted rewards until (and including) the next done.
std::vector<double> brute_force_returns(const std::vector<double>& rewards,
                                        const std::vector<char>& dones, double gamma) {
  const size_t n = rewards.size();
  std::vector<double> out(n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    double g = 0.0, d = 1.0;
    for (size_t j = i; j < n; ++j) {
      g += d * rewards[j];
      d *= gamma;
      if (dones[j]) break;
    }
    out[i] = g;
  }
  return out;
}

RolloutBuffer bandit_rollout(Policy& policy, int steps, Rng& rng) {
  // 2-armed bandit: arm 0 pays 1, arm 1 pays 0; every pull is its own episode.
  RolloutBuffer buf;
  buf.capacity = steps;
  Vec obs = Vec::Ones(1);
  for (int t = 0; t < steps; ++t) {
    ActionSample s = sample_action(policy, obs, rng);
    Transition tr;
    tr.observation = obs;
    tr.action = s.action;
    tr.log_prob_old = s.log_prob;
    tr.reward = s.action == 0 ? 1.0 : 0.0;
    tr.done = true;
    tr.value_estimate = s.value;
    buf.add(std::move(tr));
  }
  return buf;
}

bool mats_equal(const Mat& a, const Mat& b) { return (a.array() == b.array()).all(); }

bool policies_bit_identical(const Policy& a, const Policy& b) {
  for (size_t l = 0; l < a.actor.weights.size(); ++l) {
    if (!mats_equal(a.actor.weights[l], b.actor.weights[l])) return false;
    if (!(a.actor.biases[l].array() == b.actor.biases[l].array()).all()) return false;
  }
  return true;
}

}  // namespace

// --- returns ---

TEST_CASE("returns of [1,1,1] at gamma 0.95") {
  std::vector<double> g = compute_returns({1.0, 1.0, 1.0}, {0, 0, 0}, 0.95);
  REQUIRE(g.size() == 3);
  CHECK(g[0] == doctest::Approx(2.8525).epsilon(1e-12));
  CHECK(g[1] == doctest::Approx(1.95).epsilon(1e-12));
  CHECK(g[2] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("gamma 0 reduces returns to the rewards themselves") {
  std::vector<double> r = {0.3, -1.2, 4.0, 0.0};
  std::vector<double> g = compute_returns(r, {0, 0, 0, 0}, 0.0);
  for (size_t i = 0; i < r.size(); ++i) CHECK(g[i] == r[i]);
}

TEST_CASE("done boundary stops the discounted accumulation") {
  std::vector<double> g = compute_returns({1.0, 1.0}, {1, 0}, 0.95);
  CHECK(g[0] == 1.0);
  CHECK(g[1] == 1.0);
}

TEST_CASE("returns match the quadratic oracle on 500 random sequences") {
  Rng rng(101);
  for (int trial = 0; trial < 500; ++trial) {
    int n = 1 + rng.uniform_int(60);
    std::vector<double> rewards(n);
    std::vector<char> dones(n);
    for (int i = 0; i < n; ++i) {
      rewards[i] = rng.uniform(-5.0, 5.0);
      dones[i] = rng.uniform() < 0.15 ? 1 : 0;
    }
    double gamma = rng.uniform();
    std::vector<double> fast = compute_returns(rewards, dones, gamma);
    std::vector<double> slow = brute_force_returns(rewards, dones, gamma);
    for (int i = 0; i < n; ++i) CHECK(std::abs(fast[i] - slow[i]) < 1e-10);
  }
}

TEST_CASE("buffer returns discount within streams, not across them") {
  RolloutBuffer buf;
  buf.capacity = 8;
  auto push = [&](int stream, double reward, bool done) {
    Transition t;
    t.stream = stream;
    t.reward = reward;
    t.done = done;
    buf.add(std::move(t));
  };
  // interleaved: s0 r=1, s1 r=2, s0 r=1(done), s1 r=4(done)
  push(0, 1.0, false);
  push(1, 2.0, false);
  push(0, 1.0, true);
  push(1, 4.0, true);
  std::vector<double> g = buffer_returns(buf, 0.5);
  CHECK(g[0] == doctest::Approx(1.5).epsilon(1e-12));   // 1 + 0.5 * 1
  CHECK(g[1] == doctest::Approx(4.0).epsilon(1e-12));   // 2 + 0.5 * 4
  CHECK(g[2] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(g[3] == doctest::Approx(4.0).epsilon(1e-12));
}

// --- advantages ---

TEST_CASE("advantages: returns [2,0], values [1,1] normalize to [1,-1]") {
  // the normalizer divides by std + 1e-8, so the result is 1e-8 shy of +/-1
  std::vector<double> a = compute_advantages({2.0, 0.0}, {1.0, 1.0});
  CHECK(a[0] == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(a[1] == doctest::Approx(-1.0).epsilon(1e-7));
}

TEST_CASE("constant raw advantages normalize to exact zeros") {
  std::vector<double> a = compute_advantages({3.0, 3.0, 3.0}, {1.0, 1.0, 1.0});
  for (double v : a) CHECK(v == 0.0);
}

TEST_CASE("values equal to returns leave every advantage at exactly zero") {
  std::vector<double> g = {1.7, -2.9, 0.3125, 4.0};
  std::vector<double> a = compute_advantages(g, g);
  for (double v : a) CHECK(v == 0.0);
}

TEST_CASE("single-element batch is left unnormalized") {
  std::vector<double> a = compute_advantages({5.0}, {2.0});
  CHECK(a[0] == 3.0);
}

TEST_CASE("normalized advantages have mean 0 and unit population std") {
  Rng rng(103);
  std::vector<double> g(64), v(64);
  for (int i = 0; i < 64; ++i) {
    g[i] = rng.uniform(-10.0, 10.0);
    v[i] = rng.uniform(-10.0, 10.0);
  }
  std::vector<double> a = compute_advantages(g, v);
  double mean = 0.0;
  for (double x : a) mean += x;
  mean /= a.size();
  double var = 0.0;
  for (double x : a) var += (x - mean) * (x - mean);
  var /= a.size();
  CHECK(std::abs(mean) < 1e-12);
  CHECK(std::sqrt(var) == doctest::Approx(1.0).epsilon(1e-6));
}

// --- clipped surrogate ---

TEST_CASE("clipped surrogate frozen values") {
  CHECK(clipped_surrogate(1.0, 1.0, 0.2) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(clipped_surrogate(1.5, 1.0, 0.2) == doctest::Approx(1.2).epsilon(1e-15));
  CHECK(clipped_surrogate(0.5, -1.0, 0.2) == doctest::Approx(-0.8).epsilon(1e-15));
}

TEST_CASE("surrogate is bounded by both its branches on 10k random pairs") {
  Rng rng(107);
  for (int i = 0; i < 10000; ++i) {
    double r = rng.uniform(0.0, 3.0);
    double a = rng.uniform(-4.0, 4.0);
    double eps = rng.uniform(0.05, 0.5);
    double s = clipped_surrogate(r, a, eps);
    double clipped = std::clamp(r, 1.0 - eps, 1.0 + eps) * a;
    CHECK(s <= r * a + 1e-12);
    CHECK(s <= clipped + 1e-12);
    CHECK(s == doctest::Approx(std::min(r * a, clipped)).epsilon(1e-12));
  }
}

TEST_CASE("beyond the clip region the surrogate is flat") {
  double base = clipped_surrogate(1.2, 2.0, 0.2);
  CHECK(clipped_surrogate(1.5, 2.0, 0.2) == base);
  CHECK(clipped_surrogate(9.0, 2.0, 0.2) == base);
}

// --- action sampling ---

TEST_CASE("categorical samples are valid and carry consistent log-probs") {
  Rng init(109), act(110);
  Policy p = make_categorical_policy(3, 16, 5, init);
  Vec obs(3);
  obs << 0.1, -0.2, 0.3;
  for (int i = 0; i < 50; ++i) {
    ActionSample s = sample_action(p, obs, act);
    CHECK(s.action >= 0);
    CHECK(s.action < 5);
    CategoricalDist d{forward(p.actor, obs)};
    CHECK(s.log_prob == doctest::Approx(categorical_log_prob(d, s.action)).epsilon(1e-12));
    CHECK(s.value == doctest::Approx(forward(p.critic, obs)[0]).epsilon(1e-12));
  }
}

TEST_CASE("gaussian mean action is deterministic and inside the unit box") {
  Rng init(113);
  Policy p = make_gaussian_policy(4, 16, 3, 3, false, init);
  Vec obs = Vec::Constant(4, 0.5);
  ActionSample a = mean_action(p, obs);
  ActionSample b = mean_action(p, obs);
  REQUIRE(a.executed.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(a.executed[i] == b.executed[i]);
    CHECK(a.executed[i] > -1.0);
    CHECK(a.executed[i] < 1.0);
  }
}

TEST_CASE("gaussian samples keep the raw draw and clamp the executed copy") {
  Rng init(127), act(128);
  Policy p = make_gaussian_policy(2, 8, 2, 2, false, init);
  Vec obs = Vec::Zero(2);
  bool saw_clamp_difference = false;
  for (int i = 0; i < 200; ++i) {
    ActionSample s = sample_action(p, obs, act);
    for (int k = 0; k < 2; ++k) {
      CHECK(s.executed[k] >= -1.0);
      CHECK(s.executed[k] <= 1.0);
      if (s.executed[k] != s.action_vec[k]) saw_clamp_difference = true;
    }
    DiagGaussianDist d{forward(p.actor, obs), p.log_std};
    CHECK(s.log_prob == doctest::Approx(gaussian_log_prob(d, s.action_vec)).epsilon(1e-10));
  }
  // with std 0.5 around tanh means some raw draws must leave [-1,1]
  CHECK(saw_clamp_difference);
}

// --- ppo update ---

TEST_CASE("first pass over an untouched buffer has mean ratio 1") {
  Rng init(131), act(132), upd(133);
  Policy p = make_categorical_policy(2, 16, 3, init);
  RolloutBuffer buf;
  buf.capacity = 64;
  Rng obs_rng(134);
  for (int t = 0; t < 64; ++t) {
    Vec obs(2);
    obs << obs_rng.uniform(-1.0, 1.0), obs_rng.uniform(-1.0, 1.0);
    ActionSample s = sample_action(p, obs, act);
    Transition tr;
    tr.observation = obs;
    tr.action = s.action;
    tr.log_prob_old = s.log_prob;
    tr.reward = obs_rng.uniform();
    tr.done = true;
    tr.value_estimate = s.value;
    buf.add(std::move(tr));
  }
  PpoHyperparams hp;
  hp.update_epochs = 1;
  hp.minibatch_size = 64;  // single minibatch covers the whole buffer
  UpdateStats st = ppo_update(p, buf, hp, upd);
  CHECK(st.minibatches == 1);
  CHECK(st.samples == 64);
  CHECK(st.mean_ratio == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("zero advantages with zero entropy bonus leave the actor untouched") {
  // value estimates equal to the returns make every normalized advantage an
  // exact zero, so the only possible actor signal would be the entropy term
  Rng init(137), act(138), upd(139);
  Policy p = make_categorical_policy(2, 8, 3, init);
  RolloutBuffer buf;
  buf.capacity = 32;
  Vec obs = Vec::Constant(2, 0.5);
  for (int t = 0; t < 32; ++t) {
    ActionSample s = sample_action(p, obs, act);
    Transition tr;
    tr.observation = obs;
    tr.action = s.action;
    tr.log_prob_old = s.log_prob;
    tr.reward = 1.0;
    tr.done = true;
    tr.value_estimate = 1.0;  // == return
    buf.add(std::move(tr));
  }
  Policy before = p;
  PpoHyperparams hp;
  hp.entropy_coef = 0.0;
  hp.minibatch_size = 32;
  ppo_update(p, buf, hp, upd);
  CHECK(policies_bit_identical(before, p));
  // the critic still learns: its own forward disagrees with the return
  CHECK_FALSE(mats_equal(before.critic.weights[0], p.critic.weights[0]));
}

TEST_CASE("with advantages zeroed, a nonzero entropy bonus does move the actor") {
  Rng init(141), act(142), upd(143);
  Policy p = make_categorical_policy(2, 8, 3, init);
  RolloutBuffer buf;
  buf.capacity = 16;
  Vec obs = Vec::Constant(2, 0.5);
  for (int t = 0; t < 16; ++t) {
    ActionSample s = sample_action(p, obs, act);
    Transition tr;
    tr.observation = obs;
    tr.action = s.action;
    tr.log_prob_old = s.log_prob;
    tr.reward = 1.0;
    tr.done = true;
    tr.value_estimate = 1.0;
    buf.add(std::move(tr));
  }
  Policy before = p;
  PpoHyperparams hp;
  hp.entropy_coef = 0.01;
  hp.minibatch_size = 16;
  ppo_update(p, buf, hp, upd);
  CHECK_FALSE(policies_bit_identical(before, p));
}

TEST_CASE("lr 0 leaves every parameter bit-identical") {
  Rng init(149), act(150), upd(151);
  Policy p = make_categorical_policy(2, 8, 4, init);
  RolloutBuffer buf;
  buf.capacity = 40;
  Rng obs_rng(152);
  for (int t = 0; t < 40; ++t) {
    Vec obs(2);
    obs << obs_rng.uniform(-1.0, 1.0), obs_rng.uniform(-1.0, 1.0);
    ActionSample s = sample_action(p, obs, act);
    Transition tr;
    tr.observation = obs;
    tr.action = s.action;
    tr.log_prob_old = s.log_prob;
    tr.reward = obs_rng.uniform(-1.0, 1.0);
    tr.done = obs_rng.uniform() < 0.2;
    tr.value_estimate = s.value;
    buf.add(std::move(tr));
  }
  Policy before = p;
  PpoHyperparams hp;
  hp.lr = 0.0;
  ppo_update(p, buf, hp, upd);
  CHECK(policies_bit_identical(before, p));
  CHECK(mats_equal(before.critic.weights[0], p.critic.weights[0]));
  CHECK((before.critic.biases[1].array() == p.critic.biases[1].array()).all());
}

TEST_CASE("the buffer is cleared after an update") {
  Rng init(157), act(158), upd(159);
  Policy p = make_categorical_policy(1, 8, 2, init);
  RolloutBuffer buf = bandit_rollout(p, 16, act);
  CHECK(buf.size() == 16);
  PpoHyperparams hp;
  hp.minibatch_size = 16;
  ppo_update(p, buf, hp, upd);
  CHECK(buf.size() == 0);
}

TEST_CASE("ppo solves a 2-armed bandit: p(best arm) > 0.95 after 200 updates") {
  Rng init(163), act(164), upd(165);
  Policy p = make_categorical_policy(1, 16, 2, init);
  PpoHyperparams hp;
  hp.lr = 1e-2;
  hp.minibatch_size = 64;
  hp.batch_size = 64;
  for (int round = 0; round < 200; ++round) {
    RolloutBuffer buf = bandit_rollout(p, 64, act);
    ppo_update(p, buf, hp, upd);
  }
  CategoricalDist d{forward(p.actor, Vec::Ones(1))};
  CHECK(d.probs[0] > 0.95);
}

TEST_CASE("non-finite rewards trigger the numeric error") {
  Rng init(167), act(168), upd(169);
  Policy p = make_categorical_policy(1, 8, 2, init);
  RolloutBuffer buf = bandit_rollout(p, 8, act);
  buf.transitions[3].reward = std::numeric_limits<double>::quiet_NaN();
  PpoHyperparams hp;
  hp.minibatch_size = 8;
  CHECK_THROWS_AS(ppo_update(p, buf, hp, upd), PpoNumericError);
}

TEST_CASE("updates are deterministic given identical rng streams") {
  auto run = [] {
    Rng init(171), act(172), upd(173);
    Policy p = make_categorical_policy(1, 8, 2, init);
    for (int round = 0; round < 5; ++round) {
      RolloutBuffer buf = bandit_rollout(p, 32, act);
      PpoHyperparams hp;
      hp.minibatch_size = 16;
      ppo_update(p, buf, hp, upd);
    }
    return forward(p.actor, Vec::Ones(1));
  };
  Vec a = run(), b = run();
  CHECK((a.array() == b.array()).all());
}
