#pragma once

#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "metrics.hpp"
#include "nav_env.hpp"
#include "ppo.hpp"
#include "rng.hpp"
#include "tensor_io.hpp"

namespace hammer {

// Central agent actor-critic plus the single local actor-critic shared by all
// n agents (every agent evaluates and updates the same parameter set).
// `central` is absent outside hammer mode.
struct PolicyBundle {
  std::optional<Policy> central;
  Policy local;
};

// Input/output layout resolved once per run; mismatches are construction-time
// errors, never mid-episode.
struct LayoutDims {
  int obs_dim = 0;
  int action_enc_dim = 0;    // one-hot(5) for discrete actions, raw 2-vector otherwise
  int global_input_dim = 0;  // n * obs_dim + n * action_enc_dim
  int local_input_dim = 0;
  int message_length = 0;    // 0 when the mode carries no messages
  int local_action_dim = 0;  // 5 discrete actions or a 2-d force
};

LayoutDims resolve_dims(RunMode mode, EnvKind env, int n_agents, int message_length);

// Networks are created in a fixed order (central actor, central critic, local
// actor, local critic) from their respective streams, so modes without a
// central agent leave the central stream untouched.
PolicyBundle make_bundle(RunMode mode, EnvKind env, const LayoutDims& dims,
                         int hidden_units, Rng& central_rng, Rng& local_rng);

Vec encode_discrete_action(int action);  // one-hot over the 5 moves

// Concatenated per-agent observations followed by per-agent previous-action
// encodings, fixed agent order. An empty prev_enc (first time step) fills the
// action slots with zeros.
Vec build_global_input(const std::vector<Vec>& observations,
                       const std::vector<Vec>& prev_enc, int action_enc_dim);

struct CentralEmission {
  std::vector<Vec> messages;     // clipped to [-1,1], delivered to agents
  std::vector<Vec> raw_samples;  // pre-clip gaussian draws, stored as actions
  std::vector<double> log_probs; // per recipient block
  double value = 0.0;            // central critic estimate of the global input
};

// One central forward pass emits an (n*m)-vector of tanh means; a diagonal
// gaussian is sampled per component (when stochastic) and split into n
// contiguous blocks of m. log_probs[i] covers block i only.
CentralEmission emit_messages(const Policy& central, const Vec& global_input,
                              Rng& rng, bool stochastic);

// Local network input: observation first, then the message.
Vec augment_observation(const Vec& observation, const Vec& message);

// The central agent's reward for message stream i is whatever local agent i
// earned this step.
std::vector<double> assign_central_rewards(const std::vector<double>& local_rewards);

std::vector<Vec> sample_random_messages(int n_agents, int message_length, Rng& rng);

struct EpisodeSummary {
  std::vector<double> agent_returns;
  double mean_return_per_agent = 0.0;
  int collisions = 0;
  std::vector<UpdateStats> central_updates;
  std::vector<UpdateStats> local_updates;
};

// One experiment run: environment, policy bundle, the two buffers, and the
// named rng streams, advanced episode by episode. Construction validates all
// dimensions for the configured mode.
class TrainRun {
 public:
  explicit TrainRun(const ExperimentConfig& cfg);

  // Full episode of the training loop: build the global input, emit (or
  // fabricate, or skip) messages, sample local actions, step the environment,
  // record transitions, and run a PPO update whenever a buffer fills.
  EpisodeSummary run_episode();

  // Evaluation rollout without learning or buffer writes. stochastic=false
  // plays greedy/mean actions and deterministic (tanh-mean) messages;
  // random-message mode still draws its noise either way.
  double eval_episode(Rng& eval_rng, bool stochastic);

  const PolicyBundle& bundle() const { return bundle_; }
  PolicyBundle& bundle() { return bundle_; }
  const RolloutBuffer& central_buffer() const { return central_buffer_; }
  const RolloutBuffer& local_buffer() const { return local_buffer_; }
  const LayoutDims& dims() const { return dims_; }
  const ExperimentConfig& config() const { return cfg_; }

 private:
  struct StepOutcome {
    std::vector<double> rewards;
    int collisions = 0;
    bool done = false;
  };

  ExperimentConfig cfg_;
  LayoutDims dims_;
  NavWorld world_;
  PolicyBundle bundle_;
  RolloutBuffer central_buffer_;
  RolloutBuffer local_buffer_;
  Rng env_rng_;
  Rng central_rng_;
  Rng local_rng_;
  Rng message_rng_;
};

struct TrainResult {
  std::vector<MetricsRow> curve;
  double final_eval = 0.0;
  int64_t wall_ms = 0;
};

// Runs cfg.total_episodes episodes with central and local learners updating
// simultaneously; returns the per-episode learning curve. Pure compute, no
// file output.
TrainResult train(const ExperimentConfig& cfg, TrainRun* out_run = nullptr);

// train() plus the run directory contract: resolved config, metrics CSV,
// checkpoints, and a manifest. Returns the run directory path.
std::string train_and_write(const ExperimentConfig& cfg);

// Checkpoint packing. Loading requires an identically-shaped bundle.
TensorMap pack_bundle(const PolicyBundle& bundle);
void unpack_bundle(const TensorMap& map, PolicyBundle& bundle);

// Output root override honored by train_and_write (relative output dirs are
// placed under it when set).
inline constexpr const char* kOutputRootEnvVar = "HAMMER_OUTPUT_ROOT";
std::string resolve_output_dir(const std::string& configured);

std::string version_string();

}  // namespace hammer
