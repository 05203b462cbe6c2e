#include "hammer.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <stdexcept>

namespace hammer {

namespace fs = std::filesystem;

// --- layout / construction ---

LayoutDims resolve_dims(RunMode mode, EnvKind env, int n_agents, int message_length) {
  if (n_agents < 1) throw std::runtime_error("resolve_dims: n_agents must be >= 1");
  LayoutDims d;
  d.obs_dim = nav_obs_dim(n_agents, n_agents);
  d.action_enc_dim = env == EnvKind::kNav ? kNavActionCount : 2;
  d.local_action_dim = env == EnvKind::kNav ? kNavActionCount : 2;
  d.global_input_dim = n_agents * (d.obs_dim + d.action_enc_dim);
  bool messaged = mode == RunMode::kHammer || mode == RunMode::kRandomMessage;
  if (messaged && message_length < 1)
    throw std::runtime_error("resolve_dims: message_length must be >= 1 in messaged modes");
  d.message_length = messaged ? message_length : 0;
  switch (mode) {
    case RunMode::kHammer:
    case RunMode::kRandomMessage:
      d.local_input_dim = d.obs_dim + d.message_length;
      break;
    case RunMode::kIndependent:
      d.local_input_dim = d.obs_dim;
      break;
    case RunMode::kCentralized:
      d.local_input_dim = n_agents * d.obs_dim;
      break;
  }
  return d;
}

PolicyBundle make_bundle(RunMode mode, EnvKind env, const LayoutDims& dims,
                         int hidden_units, Rng& central_rng, Rng& local_rng) {
  PolicyBundle b{
      std::nullopt,
      env == EnvKind::kNav
          ? make_categorical_policy(dims.local_input_dim, hidden_units, kNavActionCount, local_rng)
          : make_gaussian_policy(dims.local_input_dim, hidden_units, 2, 2, false, local_rng)};
  if (mode == RunMode::kHammer) {
    int n = dims.global_input_dim / (dims.obs_dim + dims.action_enc_dim);
    b.central = make_gaussian_policy(dims.global_input_dim, hidden_units,
                                     n * dims.message_length, dims.message_length,
                                     /*block_factored=*/true, central_rng);
  }
  return b;
}

Vec encode_discrete_action(int action) {
  if (action < 0 || action >= kNavActionCount)
    throw std::runtime_error("encode_discrete_action: action out of range");
  Vec enc = Vec::Zero(kNavActionCount);
  enc[action] = 1.0;
  return enc;
}

Vec build_global_input(const std::vector<Vec>& observations,
                       const std::vector<Vec>& prev_enc, int action_enc_dim) {
  if (observations.empty()) throw std::runtime_error("build_global_input: no observations");
  if (!prev_enc.empty() && prev_enc.size() != observations.size())
    throw std::runtime_error("build_global_input: prev_enc count mismatch");
  int n = static_cast<int>(observations.size());
  int obs_dim = static_cast<int>(observations[0].size());
  Vec g = Vec::Zero(static_cast<Eigen::Index>(n) * (obs_dim + action_enc_dim));
  Eigen::Index at = 0;
  for (const Vec& o : observations) {
    if (o.size() != obs_dim) throw std::runtime_error("build_global_input: ragged observations");
    g.segment(at, obs_dim) = o;
    at += obs_dim;
  }
  for (int i = 0; i < n; ++i) {
    if (!prev_enc.empty()) {
      if (prev_enc[i].size() != action_enc_dim)
        throw std::runtime_error("build_global_input: bad action encoding length");
      g.segment(at, action_enc_dim) = prev_enc[i];
    }
    at += action_enc_dim;  // zeros before the first action exists
  }
  return g;
}

CentralEmission emit_messages(const Policy& central, const Vec& global_input,
                              Rng& rng, bool stochastic) {
  if (central.kind != PolicyKind::kGaussian || !central.block_factored)
    throw std::runtime_error("emit_messages: central policy must be block-factored gaussian");
  int m = central.action_block;
  int total = central.actor.output_dim();
  int n = total / m;
  DiagGaussianDist dist{forward(central.actor, global_input), central.log_std};
  Vec raw = stochastic ? gaussian_sample(dist, rng) : dist.mean;
  CentralEmission em;
  em.value = forward(central.critic, global_input)[0];
  em.messages.reserve(n);
  em.raw_samples.reserve(n);
  em.log_probs.reserve(n);
  for (int i = 0; i < n; ++i) {
    Vec block = raw.segment(static_cast<Eigen::Index>(i) * m, m);
    DiagGaussianDist block_dist{dist.mean.segment(static_cast<Eigen::Index>(i) * m, m),
                                dist.log_std.segment(static_cast<Eigen::Index>(i) * m, m)};
    em.log_probs.push_back(gaussian_log_prob(block_dist, block));
    em.messages.push_back(block.cwiseMax(-1.0).cwiseMin(1.0));
    em.raw_samples.push_back(std::move(block));
  }
  return em;
}

Vec augment_observation(const Vec& observation, const Vec& message) {
  Vec out(observation.size() + message.size());
  out << observation, message;
  return out;
}

std::vector<double> assign_central_rewards(const std::vector<double>& local_rewards) {
  return local_rewards;
}

std::vector<Vec> sample_random_messages(int n_agents, int message_length, Rng& rng) {
  std::vector<Vec> out(n_agents);
  for (Vec& msg : out) {
    msg = Vec::Zero(message_length);
    for (int j = 0; j < message_length; ++j) msg[j] = rng.uniform(-1.0, 1.0);
  }
  return out;
}

// --- TrainRun ---

TrainRun::TrainRun(const ExperimentConfig& cfg)
    : cfg_([&] {
        ExperimentConfig c = cfg;
        c.resolve();
        return c;
      }()),
      dims_(resolve_dims(cfg_.mode, cfg_.env, cfg_.n_agents, cfg_.message_length)),
      world_(make_nav_world(cfg_.n_agents)),
      bundle_([&] {
        Rng central_rng = named_stream(cfg_.seed, "central-policy-init");
        Rng local_rng = named_stream(cfg_.seed, "local-policy-init");
        return make_bundle(cfg_.mode, cfg_.env, dims_, cfg_.hidden_units, central_rng, local_rng);
      }()),
      // The central learner's batch counts its own experiences; the local
      // batch is per agent, and the parameter-shared learner pools all n
      // agents' transitions, so its buffer triggers at batch_size * n.
      central_buffer_{{}, cfg_.central.batch_size, BufferOwner::kCentral},
      local_buffer_{{}, cfg_.local.batch_size * cfg_.n_agents, BufferOwner::kLocal},
      env_rng_(named_stream(cfg_.seed, "env")),
      central_rng_(named_stream(cfg_.seed, "central-policy")),
      local_rng_(named_stream(cfg_.seed, "local-policy")),
      message_rng_(named_stream(cfg_.seed, "random-messages")) {}

EpisodeSummary TrainRun::run_episode() {
  const int n = cfg_.n_agents;
  std::vector<Vec> obs = nav_reset(world_, env_rng_);
  std::vector<Vec> prev_enc;  // empty until the first actions exist
  EpisodeSummary summary;
  summary.agent_returns.assign(n, 0.0);
  bool done = false;
  const bool has_central = cfg_.mode == RunMode::kHammer;

  while (!done) {
    Vec global_input;
    CentralEmission emission;
    std::vector<Vec> messages;
    if (has_central) {
      global_input = build_global_input(obs, prev_enc, dims_.action_enc_dim);
      emission = emit_messages(*bundle_.central, global_input, central_rng_, /*stochastic=*/true);
      messages = emission.messages;
    } else if (cfg_.mode == RunMode::kRandomMessage) {
      messages = sample_random_messages(n, dims_.message_length, message_rng_);
    }

    std::vector<Vec> inputs(n);
    if (cfg_.mode == RunMode::kCentralized) {
      Vec joint = Vec::Zero(static_cast<Eigen::Index>(n) * dims_.obs_dim);
      for (int i = 0; i < n; ++i) joint.segment(static_cast<Eigen::Index>(i) * dims_.obs_dim, dims_.obs_dim) = obs[i];
      for (int i = 0; i < n; ++i) inputs[i] = joint;
    } else if (messages.empty()) {
      inputs = obs;
    } else {
      for (int i = 0; i < n; ++i) inputs[i] = augment_observation(obs[i], messages[i]);
    }

    std::vector<ActionSample> samples(n);
    for (int i = 0; i < n; ++i) samples[i] = sample_action(bundle_.local, inputs[i], local_rng_);

    StepResult step;
    std::vector<Vec> next_enc(n);
    if (cfg_.env == EnvKind::kNav) {
      std::vector<int> actions(n);
      for (int i = 0; i < n; ++i) actions[i] = samples[i].action;
      step = nav_step(world_, actions);
      for (int i = 0; i < n; ++i) next_enc[i] = encode_discrete_action(actions[i]);
    } else {
      std::vector<Eigen::Vector2d> forces(n);
      for (int i = 0; i < n; ++i)
        forces[i] = Eigen::Vector2d(samples[i].executed[0], samples[i].executed[1]);
      step = nav_step_continuous(world_, forces);
      for (int i = 0; i < n; ++i) next_enc[i] = samples[i].executed;
    }

    summary.collisions += step.collisions;
    for (int i = 0; i < n; ++i) summary.agent_returns[i] += step.rewards[i];

    if (has_central) {
      std::vector<double> central_rewards = assign_central_rewards(step.rewards);
      for (int i = 0; i < n; ++i) {
        Transition t;
        t.observation = global_input;
        t.action_vec = emission.raw_samples[i];
        t.log_prob_old = emission.log_probs[i];
        t.reward = central_rewards[i];
        t.done = step.done;
        t.value_estimate = emission.value;
        t.stream = i;
        central_buffer_.add(std::move(t));
      }
    }
    for (int i = 0; i < n; ++i) {
      Transition t;
      t.observation = inputs[i];
      t.action = samples[i].action;
      t.action_vec = samples[i].action_vec;
      t.log_prob_old = samples[i].log_prob;
      t.reward = step.rewards[i];
      t.done = step.done;
      t.value_estimate = samples[i].value;
      t.stream = i;
      local_buffer_.add(std::move(t));
    }

    // Central learner trains first when both buffers fill on the same step.
    if (has_central && central_buffer_.at_capacity())
      summary.central_updates.push_back(
          ppo_update(*bundle_.central, central_buffer_, cfg_.central, central_rng_));
    if (local_buffer_.at_capacity())
      summary.local_updates.push_back(
          ppo_update(bundle_.local, local_buffer_, cfg_.local, local_rng_));

    prev_enc = std::move(next_enc);
    obs = std::move(step.observations);
    done = step.done;
  }

  double total = 0.0;
  for (double r : summary.agent_returns) total += r;
  summary.mean_return_per_agent = total / static_cast<double>(n);
  return summary;
}

double TrainRun::eval_episode(Rng& eval_rng, bool stochastic) {
  const int n = cfg_.n_agents;
  NavWorld world = make_nav_world(cfg_.n_agents);
  std::vector<Vec> obs = nav_reset(world, eval_rng);
  std::vector<Vec> prev_enc;
  double total = 0.0;
  bool done = false;
  while (!done) {
    std::vector<Vec> messages;
    if (cfg_.mode == RunMode::kHammer) {
      Vec g = build_global_input(obs, prev_enc, dims_.action_enc_dim);
      messages = emit_messages(*bundle_.central, g, eval_rng, stochastic).messages;
    } else if (cfg_.mode == RunMode::kRandomMessage) {
      messages = sample_random_messages(n, dims_.message_length, eval_rng);
    }
    std::vector<Vec> inputs(n);
    if (cfg_.mode == RunMode::kCentralized) {
      Vec joint = Vec::Zero(static_cast<Eigen::Index>(n) * dims_.obs_dim);
      for (int i = 0; i < n; ++i) joint.segment(static_cast<Eigen::Index>(i) * dims_.obs_dim, dims_.obs_dim) = obs[i];
      for (int i = 0; i < n; ++i) inputs[i] = joint;
    } else if (messages.empty()) {
      inputs = obs;
    } else {
      for (int i = 0; i < n; ++i) inputs[i] = augment_observation(obs[i], messages[i]);
    }
    StepResult step;
    std::vector<Vec> next_enc(n);
    if (cfg_.env == EnvKind::kNav) {
      std::vector<int> actions(n);
      for (int i = 0; i < n; ++i) {
        ActionSample s = stochastic ? sample_action(bundle_.local, inputs[i], eval_rng)
                                    : mean_action(bundle_.local, inputs[i]);
        actions[i] = s.action;
      }
      step = nav_step(world, actions);
      for (int i = 0; i < n; ++i) next_enc[i] = encode_discrete_action(actions[i]);
    } else {
      std::vector<Eigen::Vector2d> forces(n);
      for (int i = 0; i < n; ++i) {
        ActionSample s = stochastic ? sample_action(bundle_.local, inputs[i], eval_rng)
                                    : mean_action(bundle_.local, inputs[i]);
        forces[i] = Eigen::Vector2d(s.executed[0], s.executed[1]);
        next_enc[i] = s.executed;
      }
      step = nav_step_continuous(world, forces);
    }
    for (double r : step.rewards) total += r / static_cast<double>(n);
    prev_enc = std::move(next_enc);
    obs = std::move(step.observations);
    done = step.done;
  }
  return total;
}

// --- training loops ---

namespace {

MetricsRow summarize_episode(int episode, const EpisodeSummary& s, const ExperimentConfig& cfg,
                             std::int64_t wall_ms) {
  MetricsRow row;
  row.episode = episode;
  row.mean_reward_per_agent = s.mean_return_per_agent;
  row.collisions = s.collisions;
  if (!s.central_updates.empty()) {
    double acc = 0.0;
    for (const UpdateStats& u : s.central_updates) acc += u.total_loss(cfg.central);
    row.central_loss = acc / static_cast<double>(s.central_updates.size());
  }
  if (!s.local_updates.empty()) {
    double loss = 0.0, ent = 0.0;
    for (const UpdateStats& u : s.local_updates) {
      loss += u.total_loss(cfg.local);
      ent += u.entropy;
    }
    row.local_loss = loss / static_cast<double>(s.local_updates.size());
    row.entropy = ent / static_cast<double>(s.local_updates.size());
  }
  row.wall_ms = wall_ms;
  return row;
}

TrainResult train_loop(TrainRun& run, const std::function<void(int, TrainRun&)>& per_episode) {
  using Clock = std::chrono::steady_clock;
  const ExperimentConfig& cfg = run.config();
  TrainResult result;
  result.curve.reserve(cfg.total_episodes);
  auto run_start = Clock::now();
  for (int episode = 1; episode <= cfg.total_episodes; ++episode) {
    auto ep_start = Clock::now();
    EpisodeSummary s = run.run_episode();
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - ep_start);
    result.curve.push_back(summarize_episode(episode, s, cfg, ms.count()));
    if (per_episode) per_episode(episode, run);
  }
  if (cfg.eval_episodes > 0) {
    Rng eval_rng = named_stream(cfg.seed, "eval");
    double acc = 0.0;
    for (int e = 0; e < cfg.eval_episodes; ++e)
      acc += run.eval_episode(eval_rng, cfg.eval_stochastic);
    result.final_eval = acc / static_cast<double>(cfg.eval_episodes);
  }
  result.wall_ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - run_start).count();
  return result;
}

}  // namespace

TrainResult train(const ExperimentConfig& cfg, TrainRun* out_run) {
  TrainRun run(cfg);
  TrainResult result = train_loop(run, nullptr);
  if (out_run) *out_run = run;
  return result;
}

std::string resolve_output_dir(const std::string& configured) {
  fs::path p(configured);
  if (p.is_absolute()) return p.string();
  const char* root = std::getenv(kOutputRootEnvVar);
  if (root && *root) return (fs::path(root) / p).string();
  return p.string();
}

std::string version_string() {
#ifdef HAMMER_VERSION_STRING
  return HAMMER_VERSION_STRING;
#else
  return "unversioned";
#endif
}

std::string train_and_write(const ExperimentConfig& cfg) {
  ExperimentConfig resolved = cfg;
  resolved.resolve();
  fs::path run_dir = fs::path(resolve_output_dir(resolved.output_dir)) / run_name(resolved);
  fs::create_directories(run_dir);
  save_config_file(resolved, (run_dir / "config.txt").string());

  TrainRun run(resolved);
  auto per_episode = [&](int episode, TrainRun& r) {
    if (resolved.checkpoint_every > 0 && episode % resolved.checkpoint_every == 0 &&
        episode != resolved.total_episodes) {
      save_tensor_map(pack_bundle(r.bundle()),
                      (run_dir / ("checkpoint_ep" + std::to_string(episode) + ".txt")).string());
    }
  };
  TrainResult result = train_loop(run, per_episode);

  write_metrics(result.curve, (run_dir / "metrics.csv").string());
  save_tensor_map(pack_bundle(run.bundle()), (run_dir / "checkpoint_final.txt").string());

  std::ofstream manifest(run_dir / "manifest.txt", std::ios::binary);
  if (!manifest) throw std::runtime_error("cannot write manifest in '" + run_dir.string() + "'");
  manifest << "run = " << run_name(resolved) << '\n'
           << "seed = " << resolved.seed << '\n'
           << "config_fingerprint = " << config_fingerprint(resolved) << '\n'
           << "version = " << version_string() << '\n'
           << "episodes = " << resolved.total_episodes << '\n'
           << "wall_ms = " << result.wall_ms << '\n';
  if (resolved.eval_episodes > 0)
    manifest << "final_eval = " << format_double(result.final_eval) << '\n';
  if (!result.curve.empty())
    manifest << "final_score_500 = " << format_double(final_score(result.curve, 500)) << '\n';
  if (!manifest) throw std::runtime_error("short write to manifest");
  return run_dir.string();
}

// --- checkpointing ---

namespace {

void pack_mlp(TensorMap& map, const std::string& prefix, const Mlp& net, const AdamState& opt) {
  for (int l = 0; l < net.num_layers(); ++l) {
    std::string ln = std::to_string(l);
    map.put(prefix + ".w" + ln, net.weights[l]);
    map.put_vec(prefix + ".b" + ln, net.biases[l]);
    map.put(prefix + ".adam.mw" + ln, opt.m_w[l]);
    map.put(prefix + ".adam.vw" + ln, opt.v_w[l]);
    map.put_vec(prefix + ".adam.mb" + ln, opt.m_b[l]);
    map.put_vec(prefix + ".adam.vb" + ln, opt.v_b[l]);
  }
  map.put_scalar(prefix + ".adam.step", static_cast<double>(opt.step_count));
}

void check_shape(const std::string& name, const Mat& got, Eigen::Index rows, Eigen::Index cols) {
  if (got.rows() != rows || got.cols() != cols)
    throw std::runtime_error("checkpoint tensor '" + name + "' has shape " +
                             std::to_string(got.rows()) + "x" + std::to_string(got.cols()) +
                             ", expected " + std::to_string(rows) + "x" + std::to_string(cols));
}

void unpack_mlp(const TensorMap& map, const std::string& prefix, Mlp& net, AdamState& opt) {
  for (int l = 0; l < net.num_layers(); ++l) {
    std::string ln = std::to_string(l);
    const Mat& w = map.get(prefix + ".w" + ln);
    check_shape(prefix + ".w" + ln, w, net.weights[l].rows(), net.weights[l].cols());
    net.weights[l] = w;
    Vec b = map.get_vec(prefix + ".b" + ln);
    if (b.size() != net.biases[l].size())
      throw std::runtime_error("checkpoint tensor '" + prefix + ".b" + ln + "' has wrong length");
    net.biases[l] = b;
    const Mat& mw = map.get(prefix + ".adam.mw" + ln);
    check_shape(prefix + ".adam.mw" + ln, mw, w.rows(), w.cols());
    opt.m_w[l] = mw;
    const Mat& vw = map.get(prefix + ".adam.vw" + ln);
    check_shape(prefix + ".adam.vw" + ln, vw, w.rows(), w.cols());
    opt.v_w[l] = vw;
    opt.m_b[l] = map.get_vec(prefix + ".adam.mb" + ln);
    opt.v_b[l] = map.get_vec(prefix + ".adam.vb" + ln);
    if (opt.m_b[l].size() != b.size() || opt.v_b[l].size() != b.size())
      throw std::runtime_error("checkpoint adam bias moments for '" + prefix + "' have wrong length");
  }
  opt.step_count = static_cast<long>(map.get_scalar(prefix + ".adam.step"));
}

void pack_policy(TensorMap& map, const std::string& prefix, const Policy& p) {
  pack_mlp(map, prefix + ".actor", p.actor, p.actor_opt);
  pack_mlp(map, prefix + ".critic", p.critic, p.critic_opt);
  if (p.kind == PolicyKind::kGaussian) {
    map.put_vec(prefix + ".log_std", p.log_std);
    map.put_vec(prefix + ".log_std.adam.m", p.log_std_opt.m);
    map.put_vec(prefix + ".log_std.adam.v", p.log_std_opt.v);
    map.put_scalar(prefix + ".log_std.adam.step", static_cast<double>(p.log_std_opt.step_count));
  }
}

void unpack_policy(const TensorMap& map, const std::string& prefix, Policy& p) {
  unpack_mlp(map, prefix + ".actor", p.actor, p.actor_opt);
  unpack_mlp(map, prefix + ".critic", p.critic, p.critic_opt);
  if (p.kind == PolicyKind::kGaussian) {
    Vec ls = map.get_vec(prefix + ".log_std");
    if (ls.size() != p.log_std.size())
      throw std::runtime_error("checkpoint tensor '" + prefix + ".log_std' has wrong length");
    p.log_std = ls;
    p.log_std_opt.m = map.get_vec(prefix + ".log_std.adam.m");
    p.log_std_opt.v = map.get_vec(prefix + ".log_std.adam.v");
    if (p.log_std_opt.m.size() != ls.size() || p.log_std_opt.v.size() != ls.size())
      throw std::runtime_error("checkpoint log_std moments for '" + prefix + "' have wrong length");
    p.log_std_opt.step_count =
        static_cast<long>(map.get_scalar(prefix + ".log_std.adam.step"));
  }
}

}  // namespace

TensorMap pack_bundle(const PolicyBundle& bundle) {
  TensorMap map;
  map.put_scalar("meta.has_central", bundle.central ? 1.0 : 0.0);
  if (bundle.central) pack_policy(map, "central", *bundle.central);
  pack_policy(map, "local", bundle.local);
  return map;
}

void unpack_bundle(const TensorMap& map, PolicyBundle& bundle) {
  bool has_central = map.get_scalar("meta.has_central") != 0.0;
  if (has_central != bundle.central.has_value())
    throw std::runtime_error(has_central
                                 ? "checkpoint carries a central agent but the run has none"
                                 : "checkpoint has no central agent but the run expects one");
  if (bundle.central) unpack_policy(map, "central", *bundle.central);
  unpack_policy(map, "local", bundle.local);
}

}  // namespace hammer
