#include <cmath>
#include <vector>

#include "distributions.hpp"
#include "doctest.h"
#include "hammer.hpp"

using namespace hammer;

namespace {

ExperimentConfig tiny_config(RunMode mode, int episodes, uint64_t seed) {
  ExperimentConfig cfg;
  cfg.mode = mode;
  cfg.env = EnvKind::kNav;
  cfg.n_agents = 3;
  cfg.total_episodes = episodes;
  cfg.seed = seed;
  cfg.hidden_units = 16;
  cfg.eval_episodes = 2;
  return cfg;
}

bool vecs_equal(const Vec& a, const Vec& b) {
  return a.size() == b.size() && (a.array() == b.array()).all();
}

}  // namespace

// --- layout ---

TEST_CASE("dims for the messaged mode: 3 agents, 14-d obs, 4-d messages") {
  LayoutDims d = resolve_dims(RunMode::kHammer, EnvKind::kNav, 3, 4);
  CHECK(d.obs_dim == 14);
  CHECK(d.action_enc_dim == 5);
  CHECK(d.global_input_dim == 57);  // 3*14 observations + 3*5 action encodings
  CHECK(d.local_input_dim == 18);   // observation + message
  CHECK(d.message_length == 4);
  CHECK(d.local_action_dim == 5);
}

TEST_CASE("dims per mode: plain, fabricated-message, and joint-observation baselines") {
  LayoutDims ind = resolve_dims(RunMode::kIndependent, EnvKind::kNav, 3, 4);
  CHECK(ind.local_input_dim == 14);
  CHECK(ind.message_length == 0);

  LayoutDims rnd = resolve_dims(RunMode::kRandomMessage, EnvKind::kNav, 3, 4);
  CHECK(rnd.local_input_dim == 18);
  CHECK(rnd.message_length == 4);

  LayoutDims cen = resolve_dims(RunMode::kCentralized, EnvKind::kNav, 3, 4);
  CHECK(cen.local_input_dim == 42);  // full joint observation
  CHECK(cen.message_length == 0);
}

TEST_CASE("continuous env encodes previous actions as raw 2-vectors") {
  LayoutDims d = resolve_dims(RunMode::kHammer, EnvKind::kNavContinuous, 3, 4);
  CHECK(d.action_enc_dim == 2);
  CHECK(d.global_input_dim == 3 * d.obs_dim + 6);
  CHECK(d.local_action_dim == 2);
}

TEST_CASE("one-hot action encoding") {
  for (int a = 0; a < 5; ++a) {
    Vec e = encode_discrete_action(a);
    REQUIRE(e.size() == 5);
    CHECK(e.sum() == 1.0);
    CHECK(e[a] == 1.0);
  }
  CHECK_THROWS(encode_discrete_action(5));
}

TEST_CASE("global input: observations first, action encodings after, zeros on the first step") {
  std::vector<Vec> obs = {Vec::Constant(2, 1.0), Vec::Constant(2, 2.0), Vec::Constant(2, 3.0)};
  Vec g = build_global_input(obs, {}, 5);
  REQUIRE(g.size() == 21);  // 3*2 + 3*5
  CHECK(g[0] == 1.0);
  CHECK(g[2] == 2.0);
  CHECK(g[4] == 3.0);
  for (int k = 6; k < 21; ++k) CHECK(g[k] == 0.0);

  std::vector<Vec> enc = {encode_discrete_action(1), encode_discrete_action(0),
                          encode_discrete_action(4)};
  Vec g2 = build_global_input(obs, enc, 5);
  CHECK(g2[6 + 1] == 1.0);        // agent 0 chose action 1
  CHECK(g2[6 + 5 + 0] == 1.0);    // agent 1 chose action 0
  CHECK(g2[6 + 10 + 4] == 1.0);   // agent 2 chose action 4
  CHECK(g2.segment(6, 15).sum() == 3.0);
}

TEST_CASE("global input is sensitive to agent order") {
  std::vector<Vec> obs = {Vec::Constant(2, 1.0), Vec::Constant(2, 2.0)};
  std::vector<Vec> swapped = {obs[1], obs[0]};
  Vec a = build_global_input(obs, {}, 5);
  Vec b = build_global_input(swapped, {}, 5);
  CHECK_FALSE(vecs_equal(a, b));
}

TEST_CASE("augmented observation is observation then message") {
  Vec o = Vec::Constant(3, 7.0);
  Vec m = Vec::Constant(2, -1.0);
  Vec x = augment_observation(o, m);
  REQUIRE(x.size() == 5);
  CHECK(x[2] == 7.0);
  CHECK(x[3] == -1.0);
}

// --- message emission ---

TEST_CASE("one central forward yields per-agent message blocks") {
  Rng init(201), act(202);
  LayoutDims d = resolve_dims(RunMode::kHammer, EnvKind::kNav, 3, 4);
  PolicyBundle b = make_bundle(RunMode::kHammer, EnvKind::kNav, d, 16, init, init);
  REQUIRE(b.central.has_value());
  CHECK(b.central->actor.output_dim() == 12);

  Vec g = Vec::Constant(d.global_input_dim, 0.1);
  CentralEmission em = emit_messages(*b.central, g, act, true);
  REQUIRE(em.messages.size() == 3);
  REQUIRE(em.raw_samples.size() == 3);
  REQUIRE(em.log_probs.size() == 3);
  for (const Vec& msg : em.messages) {
    REQUIRE(msg.size() == 4);
    for (int k = 0; k < 4; ++k) {
      CHECK(msg[k] >= -1.0);
      CHECK(msg[k] <= 1.0);
    }
  }
  CHECK(em.value == doctest::Approx(forward(b.central->critic, g)[0]).epsilon(1e-12));
}

TEST_CASE("block log-probs decompose the joint gaussian density") {
  Rng init(203), act(204);
  LayoutDims d = resolve_dims(RunMode::kHammer, EnvKind::kNav, 3, 4);
  PolicyBundle b = make_bundle(RunMode::kHammer, EnvKind::kNav, d, 16, init, init);
  Vec g = Vec::Constant(d.global_input_dim, -0.2);
  CentralEmission em = emit_messages(*b.central, g, act, true);

  Vec joint(12);
  for (int i = 0; i < 3; ++i) joint.segment(4 * i, 4) = em.raw_samples[i];
  DiagGaussianDist dist{forward(b.central->actor, g), b.central->log_std};
  double joint_lp = gaussian_log_prob(dist, joint);
  double sum_blocks = em.log_probs[0] + em.log_probs[1] + em.log_probs[2];
  CHECK(sum_blocks == doctest::Approx(joint_lp).epsilon(1e-9));
}

TEST_CASE("deterministic emission returns the tanh means unsampled") {
  Rng init(205), act(206);
  LayoutDims d = resolve_dims(RunMode::kHammer, EnvKind::kNav, 3, 4);
  PolicyBundle b = make_bundle(RunMode::kHammer, EnvKind::kNav, d, 16, init, init);
  Vec g = Vec::Constant(d.global_input_dim, 0.3);
  CentralEmission a = emit_messages(*b.central, g, act, false);
  CentralEmission c = emit_messages(*b.central, g, act, false);
  Vec means = forward(b.central->actor, g);
  for (int i = 0; i < 3; ++i) {
    CHECK(vecs_equal(a.messages[i], c.messages[i]));
    CHECK(vecs_equal(a.raw_samples[i], means.segment(4 * i, 4)));
  }
}

TEST_CASE("central rewards mirror the local rewards stream for stream") {
  std::vector<double> r = {-1.5, 2.0, 0.25};
  std::vector<double> c = assign_central_rewards(r);
  REQUIRE(c.size() == 3);
  CHECK(c[0] == -1.5);
  CHECK(c[1] == 2.0);
  CHECK(c[2] == 0.25);
}

TEST_CASE("fabricated messages are bounded and reproducible per stream") {
  Rng a(207), b(207);
  std::vector<Vec> m1 = sample_random_messages(3, 4, a);
  std::vector<Vec> m2 = sample_random_messages(3, 4, b);
  REQUIRE(m1.size() == 3);
  for (int i = 0; i < 3; ++i) {
    REQUIRE(m1[i].size() == 4);
    CHECK(vecs_equal(m1[i], m2[i]));
    for (int k = 0; k < 4; ++k) {
      CHECK(m1[i][k] >= -1.0);
      CHECK(m1[i][k] <= 1.0);
    }
  }
}

// --- episodes and buffers ---

TEST_CASE("one messaged episode adds 75 transitions to each buffer") {
  TrainRun run(tiny_config(RunMode::kHammer, 1, 11));
  EpisodeSummary s = run.run_episode();
  CHECK(run.central_buffer().size() == 75);  // 3 streams x 25 steps
  CHECK(run.local_buffer().size() == 75);
  REQUIRE(s.agent_returns.size() == 3);
  CHECK(s.agent_returns[0] == doctest::Approx(s.agent_returns[1]).epsilon(1e-12));
  CHECK(s.mean_return_per_agent ==
        doctest::Approx((s.agent_returns[0] + s.agent_returns[1] + s.agent_returns[2]) / 3.0)
            .epsilon(1e-12));
  CHECK(s.central_updates.empty());  // default batch sizes are far larger
  CHECK(s.local_updates.empty());

  // streams partition the local buffer evenly
  int counts[3] = {0, 0, 0};
  for (const Transition& t : run.local_buffer().transitions) counts[t.stream]++;
  CHECK(counts[0] == 25);
  CHECK(counts[1] == 25);
  CHECK(counts[2] == 25);
}

TEST_CASE("plain mode records no central transitions") {
  TrainRun run(tiny_config(RunMode::kIndependent, 1, 13));
  run.run_episode();
  CHECK_FALSE(run.bundle().central.has_value());
  CHECK(run.central_buffer().size() == 0);
  CHECK(run.local_buffer().size() == 75);
  CHECK(run.local_buffer().transitions[0].observation.size() == 14);
}

TEST_CASE("fabricated-message mode feeds 18-d local inputs without a central agent") {
  TrainRun run(tiny_config(RunMode::kRandomMessage, 1, 17));
  run.run_episode();
  CHECK_FALSE(run.bundle().central.has_value());
  CHECK(run.central_buffer().size() == 0);
  CHECK(run.local_buffer().transitions[0].observation.size() == 18);
}

TEST_CASE("joint-observation mode hands every agent the same 42-d input") {
  TrainRun run(tiny_config(RunMode::kCentralized, 1, 19));
  run.run_episode();
  const auto& tr = run.local_buffer().transitions;
  REQUIRE(tr.size() == 75);
  CHECK(tr[0].observation.size() == 42);
  // first step: one transition per agent, identical joint input
  CHECK(vecs_equal(tr[0].observation, tr[1].observation));
  CHECK(vecs_equal(tr[1].observation, tr[2].observation));
}

TEST_CASE("central transitions store the global input and the raw message block") {
  TrainRun run(tiny_config(RunMode::kHammer, 1, 23));
  run.run_episode();
  const auto& tr = run.central_buffer().transitions;
  REQUIRE(tr.size() == 75);
  CHECK(tr[0].observation.size() == 57);
  CHECK(tr[0].action_vec.size() == 4);
  CHECK(tr[0].stream == 0);
  CHECK(tr[1].stream == 1);
  CHECK(tr[2].stream == 2);
  // first step: all three streams share one global input
  CHECK(vecs_equal(tr[0].observation, tr[1].observation));
  // team reward lands identically on every central stream
  CHECK(tr[0].reward == tr[1].reward);
  CHECK(tr[0].reward == tr[2].reward);
}

TEST_CASE("buffers trigger updates at their own batch sizes") {
  ExperimentConfig cfg = tiny_config(RunMode::kHammer, 1, 29);
  cfg.central.batch_size = 75;   // fills exactly at the end of the episode
  cfg.local.batch_size = 1000;   // never fills
  cfg.central.minibatch_size = 32;
  TrainRun run(cfg);
  EpisodeSummary s = run.run_episode();
  CHECK(s.central_updates.size() == 1);
  CHECK(s.local_updates.empty());
  CHECK(run.central_buffer().size() == 0);  // cleared by the update
  CHECK(run.local_buffer().size() == 75);
}

TEST_CASE("local batch size is per agent, central batch size is total") {
  ExperimentConfig cfg = tiny_config(RunMode::kHammer, 1, 30);
  cfg.central.batch_size = 80;
  cfg.local.batch_size = 40;
  TrainRun run(cfg);
  CHECK(run.central_buffer().capacity == 80);
  CHECK(run.local_buffer().capacity == 120);  // pooled over the 3 agents

  // at batch_size 25 the pooled buffer holds exactly one episode (3 * 25)
  ExperimentConfig one = tiny_config(RunMode::kIndependent, 1, 30);
  one.local.batch_size = 25;
  TrainRun pooled(one);
  EpisodeSummary s = pooled.run_episode();
  CHECK(s.local_updates.size() == 1);
  CHECK(pooled.local_buffer().size() == 0);
}

// --- training loop ---

TEST_CASE("identical configs train to bit-identical learning curves") {
  ExperimentConfig cfg = tiny_config(RunMode::kHammer, 4, 31);
  cfg.central.batch_size = 60;
  cfg.local.batch_size = 60;
  cfg.central.minibatch_size = 30;
  cfg.local.minibatch_size = 30;
  TrainResult a = train(cfg);
  TrainResult b = train(cfg);
  REQUIRE(a.curve.size() == 4);
  REQUIRE(b.curve.size() == 4);
  for (size_t i = 0; i < a.curve.size(); ++i) {
    CHECK(a.curve[i].mean_reward_per_agent == b.curve[i].mean_reward_per_agent);
    CHECK(a.curve[i].collisions == b.curve[i].collisions);
    CHECK(a.curve[i].central_loss.has_value() == b.curve[i].central_loss.has_value());
    if (a.curve[i].central_loss)
      CHECK(*a.curve[i].central_loss == *b.curve[i].central_loss);
    if (a.curve[i].local_loss)
      CHECK(*a.curve[i].local_loss == *b.curve[i].local_loss);
  }
  CHECK(a.final_eval == b.final_eval);
}

TEST_CASE("different seeds diverge") {
  ExperimentConfig c1 = tiny_config(RunMode::kHammer, 2, 37);
  ExperimentConfig c2 = tiny_config(RunMode::kHammer, 2, 38);
  TrainResult a = train(c1);
  TrainResult b = train(c2);
  CHECK(a.curve[0].mean_reward_per_agent != b.curve[0].mean_reward_per_agent);
}

TEST_CASE("zero episodes produce an empty curve") {
  ExperimentConfig cfg = tiny_config(RunMode::kIndependent, 0, 41);
  TrainResult r = train(cfg);
  CHECK(r.curve.empty());
  CHECK(std::isfinite(r.final_eval));
}

TEST_CASE("episode summaries surface losses once updates fire") {
  ExperimentConfig cfg = tiny_config(RunMode::kIndependent, 3, 43);
  cfg.local.batch_size = 25;  // pooled capacity 75: one update per episode
  cfg.local.minibatch_size = 25;
  TrainResult r = train(cfg);
  bool saw_local_loss = false;
  for (const MetricsRow& row : r.curve)
    if (row.local_loss.has_value()) saw_local_loss = true;
  CHECK(saw_local_loss);
  for (const MetricsRow& row : r.curve) CHECK_FALSE(row.central_loss.has_value());
}

TEST_CASE("evaluation episodes run without touching the buffers") {
  TrainRun run(tiny_config(RunMode::kHammer, 1, 47));
  Rng ev1(900), ev2(900);
  double a = run.eval_episode(ev1, false);
  double b = run.eval_episode(ev2, false);
  CHECK(std::isfinite(a));
  CHECK(a == b);
  CHECK(run.central_buffer().size() == 0);
  CHECK(run.local_buffer().size() == 0);
}

TEST_CASE("greedy evaluation differs from stochastic evaluation") {
  TrainRun run(tiny_config(RunMode::kIndependent, 1, 49));
  Rng ev1(901), ev2(901);
  double greedy = run.eval_episode(ev1, false);
  double sampled = run.eval_episode(ev2, true);
  CHECK(greedy != sampled);  // argmax actions vs sampled actions
}

TEST_CASE("continuous env trains end to end") {
  ExperimentConfig cfg = tiny_config(RunMode::kHammer, 2, 53);
  cfg.env = EnvKind::kNavContinuous;
  TrainResult r = train(cfg);
  REQUIRE(r.curve.size() == 2);
  CHECK(std::isfinite(r.curve[0].mean_reward_per_agent));
  CHECK(std::isfinite(r.curve[1].mean_reward_per_agent));
}

// --- checkpointing ---

TEST_CASE("bundle checkpoints round-trip bit-exactly") {
  ExperimentConfig cfg = tiny_config(RunMode::kHammer, 2, 59);
  cfg.central.batch_size = 60;
  cfg.local.batch_size = 60;
  cfg.central.minibatch_size = 30;
  cfg.local.minibatch_size = 30;
  TrainRun run(cfg);
  run.run_episode();  // move optimizer state off zero
  TensorMap saved = pack_bundle(run.bundle());

  // fresh bundle with different init, overwritten by the checkpoint
  ExperimentConfig other = cfg;
  other.seed = 9999;
  TrainRun fresh(other);
  unpack_bundle(saved, fresh.bundle());
  TensorMap reloaded = pack_bundle(fresh.bundle());

  Vec g = Vec::Constant(run.dims().global_input_dim, 0.11);
  Vec y1 = forward(run.bundle().central->actor, g);
  Vec y2 = forward(fresh.bundle().central->actor, g);
  CHECK(vecs_equal(y1, y2));

  Vec o = Vec::Constant(run.dims().local_input_dim, -0.4);
  CHECK(vecs_equal(forward(run.bundle().local.actor, o),
                   forward(fresh.bundle().local.actor, o)));
  CHECK(vecs_equal(run.bundle().central->log_std, fresh.bundle().central->log_std));
}

TEST_CASE("checkpoints refuse mismatched architectures") {
  TrainRun a(tiny_config(RunMode::kHammer, 1, 61));
  TensorMap saved = pack_bundle(a.bundle());

  ExperimentConfig wrong = tiny_config(RunMode::kHammer, 1, 61);
  wrong.hidden_units = 32;
  TrainRun b(wrong);
  CHECK_THROWS(unpack_bundle(saved, b.bundle()));

  TrainRun c(tiny_config(RunMode::kIndependent, 1, 61));
  CHECK_THROWS(unpack_bundle(saved, c.bundle()));
}

TEST_CASE("checkpoint restore resumes the exact trajectory") {
  // run A: 2 episodes straight; run B: 1 episode, checkpoint, restore, 1 more
  ExperimentConfig cfg = tiny_config(RunMode::kIndependent, 2, 67);
  cfg.local.batch_size = 25;  // pooled capacity 75: an update fires each episode
  cfg.local.minibatch_size = 25;

  TrainRun a(cfg);
  a.run_episode();
  a.run_episode();

  TrainRun b(cfg);
  b.run_episode();
  TensorMap snap = pack_bundle(b.bundle());
  unpack_bundle(snap, b.bundle());  // round-trip through the serialized form
  EpisodeSummary s2 = b.run_episode();

  Vec o = Vec::Constant(14, 0.2);
  CHECK(vecs_equal(forward(a.bundle().local.actor, o), forward(b.bundle().local.actor, o)));
  CHECK(s2.agent_returns.size() == 3);
}
